from .app import app, create_app, matrix, report, simulate

__all__ = ["app", "create_app", "matrix", "report", "simulate"]
