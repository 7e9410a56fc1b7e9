"""
Pure ALOHA: a packet is transmitted the moment it is generated. A collision is
learned when the transmission ends and the packet retries after a random
backoff.
"""

from macbench.protocols.base import RandomAccessProtocol


class PureAloha(RandomAccessProtocol):
    technique = "pure_aloha"

    def access(self, packet):
        self.note_access(packet)
        self.start_transmission(self.channel, packet, self.config.pkt_len)

    def on_end_tx(self, tx, event):
        packet = tx.packet
        if tx.collided:
            self.fail(packet, tx)
            self.retry_after(self.backoff(packet), packet, self.access)
        else:
            self.deliver(packet, tx)


def simulate_pure_aloha(config, engine=None, logger=None):
    return PureAloha(config, engine, logger).run()
