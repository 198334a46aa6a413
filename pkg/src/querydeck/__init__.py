"""querydeck: mine SQL query logs into task-specific interactive interfaces."""

__version__ = "0.1.0"
