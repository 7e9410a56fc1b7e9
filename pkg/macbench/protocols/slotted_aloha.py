"""
Slotted ALOHA: transmissions start on slot boundaries only (slot = one packet
time), so packets that collide overlap completely.
"""

import math

from macbench.protocols.base import RandomAccessProtocol


class SlottedAloha(RandomAccessProtocol):
    technique = "slotted_aloha"

    def next_boundary(self, t: float) -> float:
        slot = self.config.pkt_len
        return math.ceil(t / slot) * slot

    def mean_backoff(self) -> float:
        return super().mean_backoff() + self.config.pkt_len / 2.0

    def access(self, packet):
        self.note_access(packet)
        self.engine.schedule(
            self.next_boundary(self.engine.now), "start_tx", packet.station_id,
            f"data pkt={packet.pid}", action=lambda event: self._send(packet),
        )

    def _send(self, packet):
        # the start_tx event itself is the trace record
        self.start_transmission(self.channel, packet, self.config.pkt_len, note=False)

    def on_end_tx(self, tx, event):
        packet = tx.packet
        if tx.collided:
            self.fail(packet, tx)
            self.retry_after(self.backoff(packet), packet, self.access)
        else:
            self.deliver(packet, tx)


def simulate_slotted_aloha(config, engine=None, logger=None):
    return SlottedAloha(config, engine, logger).run()
