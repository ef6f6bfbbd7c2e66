# hqam_bicm/app/events.py
import logging
from typing import Dict, List, Callable, Any


class EventTypes:
    """Progress events published by long-running commands."""
    SPECTRUM_DONE = "spectrum_done"
    BATCH_DONE = "batch_done"
    BER_POINT_DONE = "ber_point_done"
    DESIGN_POINT_DONE = "design_point_done"


class EventManager:
    """Publishes progress events; a failing listener never stops the computation."""

    def __init__(self):
        self._listeners: Dict[str, List[Callable]] = {}

    def subscribe(self, event_type: str, listener: Callable) -> None:
        self._listeners.setdefault(event_type, []).append(listener)

    def unsubscribe(self, event_type: str, listener: Callable) -> None:
        """Remove a listener; unknown listeners are ignored."""
        listeners = self._listeners.get(event_type, [])
        if listener in listeners:
            listeners.remove(listener)

    def publish(self, event_type: str, data: Any = None) -> None:
        for listener in list(self._listeners.get(event_type, [])):
            try:
                listener(data)
            except Exception as e:
                logging.error(f"Listener for '{event_type}' failed: {e}")
