# arrowlab/__init__.py
