# collision/__init__.py
