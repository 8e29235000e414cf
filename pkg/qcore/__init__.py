# qcore/__init__.py
