"""Byte-capacity LRU content store with availability and expiry timestamps."""

from collections import OrderedDict


class LRUCache:
    """Entries are ``name -> [size, available_at, expires_at]``.

    ``available_at`` lets an entry stand in for data that is still in flight
    toward this router (a pending-interest entry); ``expires_at`` drops stale
    enabling-block chunks.
    """

    def __init__(self, capacity, record=False):
        self.capacity = capacity
        self.used = 0
        self.store = OrderedDict()
        self.hits = 0
        self.misses = 0
        self.trace = [] if record else None

    def __len__(self):
        return len(self.store)

    def __contains__(self, name):
        return name in self.store

    def lookup(self, name, now, pending_ok=True):
        """Entry for ``name`` at time ``now``, or None on a miss.

        An entry whose data is still in flight counts as a hit only when
        ``pending_ok`` (interest aggregation) is set.
        """
        entry = self.store.get(name)
        if entry is not None and entry[2] <= now:
            self._drop(name)
            entry = None
        if entry is not None and not pending_ok and entry[1] > now:
            entry = None
        if entry is None:
            self.misses += 1
        else:
            self.hits += 1
            self.store.move_to_end(name)
        if self.trace is not None:
            self.trace.append(("get", name, now, pending_ok, entry is not None))
        return entry

    def insert(self, name, size, available_at=0.0, expires_at=float("inf")):
        if self.trace is not None:
            self.trace.append(("put", name, size, available_at, expires_at))
        if size > self.capacity:
            return
        if name in self.store:
            self._drop(name)
        while self.used + size > self.capacity:
            _, old = self.store.popitem(last=False)
            self.used -= old[0]
        self.store[name] = [size, available_at, expires_at]
        self.used += size

    def _drop(self, name):
        self.used -= self.store.pop(name)[0]

    @property
    def hit_ratio(self):
        total = self.hits + self.misses
        return self.hits / total if total else 0.0
