from typing import Any
from abc import ABC, abstractmethod


class Observer(ABC):
    """Receives progress events (epoch reports, ablation results) from a running job."""

    @abstractmethod
    def notify(self, notification: Any) -> Any:
        """
        Handles one progress event.

        Args:
            notification: An EpochReport from training or a (cell, summary) pair from an ablation run.

        Returns:
            Any: Whatever the observer records; ignored by the publisher.
        """


class Observable:
    """Publishes progress events to subscribed observers, in subscription order."""

    def __init__(self):
        self.observers: list[Observer] = []

    def subscribe(self, observer: Observer) -> None:
        self.observers.append(observer)

    def unsubscribe(self, observer: Observer) -> None:
        if observer in self.observers:
            self.observers.remove(observer)

    def _notify_observers(self, notification: Any) -> None:
        for observer in self.observers:
            observer.notify(notification)
