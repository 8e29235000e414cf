# fluctuation/__init__.py
