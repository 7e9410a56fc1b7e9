"""
1-persistent CSMA.

A station senses the channel as it was `a` packet-times ago. An idle channel
means transmit now; a busy one means wait and transmit as soon as the channel
is sensed idle. Every transmission end at e schedules a sense at e + a that
releases all waiters together if the channel was idle at e, so two or more
waiters always collide.
"""

from macbench.protocols.base import RandomAccessProtocol


class PersistentCsma(RandomAccessProtocol):
    technique = "csma_1p"

    def __init__(self, config, engine=None, logger=None):
        super().__init__(config, engine, logger)
        self.waiting = []

    @property
    def sense_lag(self) -> float:
        return self.config.norm_prop_delay_a

    def access(self, packet):
        self.note_access(packet)
        if self.channel.sensed_busy(self.engine.now - self.sense_lag):
            self.waiting.append(packet)
        else:
            self.start_transmission(self.channel, packet, self.config.pkt_len)

    def on_end_tx(self, tx, event):
        packet = tx.packet
        if tx.collided:
            self.fail(packet, tx)
            self.retry_after(self.backoff(packet), packet, self.access)
        else:
            self.deliver(packet, tx)

        end = self.engine.now
        self.engine.schedule(
            end + self.sense_lag, "sense", tx.station_id, "release waiters",
            action=lambda ev: self._release(end),
        )

    def _release(self, end):
        if not self.waiting or self.channel.sensed_busy(end):
            return
        released, self.waiting = self.waiting, []
        for packet in released:
            self.start_transmission(self.channel, packet, self.config.pkt_len)


def simulate_csma_1p(config, engine=None, logger=None):
    return PersistentCsma(config, engine, logger).run()
