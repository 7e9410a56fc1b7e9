"""
CSMA/CA with optional RTS/CTS.

sense -> idle: RTS -> (CTS + data + ACK reservation)
      -> busy: back off a uniform [1, W] slots, sense again

A collided RTS loses only the short RTS frame; the station backs off and
re-accesses. Without RTS/CTS the data frame is sent directly on an idle sense.
"""

from macbench.protocols.base import RandomAccessProtocol


class CsmaCa(RandomAccessProtocol):
    technique = "csma_ca"

    def mean_backoff(self) -> float:
        return (self.config.backoff_window_slots + 1) / 2.0 * self.config.backoff_slot_time

    def backoff(self, packet) -> float:
        slots = self.stream_for(packet).integer(1, self.config.backoff_window_slots)
        return slots * self.config.backoff_slot_time

    def access(self, packet):
        self.note_access(packet)
        self.sense(packet)

    def sense(self, packet):
        cfg = self.config
        if self.channel.sensed_busy(self.engine.now - cfg.norm_prop_delay_a):
            # busy re-senses are not new accesses
            self.retry_after(self.backoff(packet), packet, self.sense)
            return

        if cfg.rts_cts_enabled:
            self.start_transmission(self.channel, packet, cfg.rts_time, kind="rts", on_end=self._on_rts_end)
        else:
            self.start_transmission(self.channel, packet, cfg.pkt_len + cfg.ack_time)

    def _on_rts_end(self, tx, event):
        packet = tx.packet
        if tx.collided:
            self.fail(packet, tx)
            self.retry_after(self.backoff(packet), packet, self.access)
            return

        cfg = self.config
        reservation = self.channel.transmit(
            packet.station_id, self.engine.now, cfg.cts_time + cfg.pkt_len + cfg.ack_time, "data", packet
        )
        self.engine.note("start_tx", packet.station_id, f"cts+data pkt={packet.pid}")
        self.engine.schedule(
            reservation.end, "end_tx", packet.station_id, f"data pkt={packet.pid}",
            action=lambda ev: self.on_end_tx(reservation, ev),
        )

    def on_end_tx(self, tx, event):
        packet = tx.packet
        if tx.collided:
            self.fail(packet, tx)
            self.retry_after(self.backoff(packet), packet, self.access)
        else:
            # only the data part of the frame counts as carried traffic
            self.deliver(packet, tx, weight=self.config.pkt_len / tx.duration)


def simulate_csma_ca(config, engine=None, logger=None):
    return CsmaCa(config, engine, logger).run()
