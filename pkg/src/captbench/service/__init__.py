from .app import MockRuntime, create_app

__all__ = ["MockRuntime", "create_app"]
