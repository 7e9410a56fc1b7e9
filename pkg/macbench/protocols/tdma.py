"""
TDMA: a frame of N slots of L/C packet-times, slot k owned by station k mod N.
A station sends its head-of-line packet only in its own slot, so there are
never collisions.
"""

from macbench.des_engine import Channel
from macbench.protocols.base import Protocol


class Tdma(Protocol):
    technique = "tdma"
    finite = True

    def __init__(self, config, engine=None, logger=None):
        super().__init__(config, engine, logger)
        self.channel = Channel()
        self.slot = config.slot_time
        self._slot_index = 0

    def start(self):
        super().start()
        self.engine.schedule(0.0, "slot_boundary", 0, "slot 0", action=self._on_slot)

    def access(self, packet):
        pass

    def on_enqueue(self, packet, queue):
        pass

    def on_dequeue(self, queue):
        pass

    def _on_slot(self, event):
        k = self._slot_index
        owner = k % self.config.n_stations
        queue = self.queues.get(owner)
        if queue:
            self.start_transmission(self.channel, queue[0], self.slot)

        self._slot_index = k + 1
        # multiply rather than accumulate so boundaries stay exact
        self.engine.schedule(
            self._slot_index * self.slot, "slot_boundary",
            self._slot_index % self.config.n_stations, f"slot {self._slot_index}",
            action=self._on_slot,
        )

    def on_end_tx(self, tx, event):
        self.deliver(tx.packet, tx)


def simulate_tdma(config, engine=None, logger=None):
    return Tdma(config, engine, logger).run()
