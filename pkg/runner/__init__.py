# runner/__init__.py
