"""Name-keyed registries for pluggable components"""

from typing import Callable, Generic, TypeVar

from app.utils.logger import get_logger

logger = get_logger(__name__)

T = TypeVar("T")


class Registry(Generic[T]):
    """
    Maps names to component classes or callables.

    Components register themselves with the decorator returned by
    ``register``; consumers resolve them by name.
    """

    def __init__(self, kind: str) -> None:
        self.kind = kind
        self._entries: dict[str, T] = {}

    def register(self, name: str) -> Callable[[T], T]:
        """
        Decorator registering a component under ``name``.
        """

        def decorator(component: T) -> T:
            if name in self._entries:
                logger.warning("registry_entry_overridden", kind=self.kind, name=name)
            self._entries[name] = component
            return component

        return decorator

    def get(self, name: str) -> T:
        entry = self._entries.get(name)
        if entry is None:
            known = ", ".join(self.names())
            raise KeyError(f"No {self.kind} registered as '{name}' (known: {known})")
        return entry

    def names(self) -> list[str]:
        return sorted(self._entries)

    def __contains__(self, name: object) -> bool:
        return name in self._entries
