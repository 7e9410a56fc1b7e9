"""
FDMA: each station owns a sub-channel of rate 1/N, so one packet occupies it
for N * L/C packet-times. Stations are independent M/D/1 queues.
"""

from macbench.des_engine import Channel
from macbench.protocols.base import Protocol


class Fdma(Protocol):
    technique = "fdma"
    finite = True

    def __init__(self, config, engine=None, logger=None):
        super().__init__(config, engine, logger)
        self.channels = [Channel() for _ in range(config.n_stations)]
        self.service_time = config.n_stations * config.slot_time

    def access(self, packet):
        self.start_transmission(self.channels[packet.station_id], packet, self.service_time)

    def on_end_tx(self, tx, event):
        # each sub-channel carries 1/N of the total bandwidth
        self.deliver(tx.packet, tx, weight=1.0 / self.config.n_stations)


def simulate_fdma(config, engine=None, logger=None):
    return Fdma(config, engine, logger).run()
