"""Writes the synthetic 168-h curtailment feed and the TOU price file."""
import math
import random
from datetime import datetime, timedelta, timezone

rng = random.Random(20210308)
start = datetime(2021, 3, 8, tzinfo=timezone.utc)
solar_peaks = [1400, 900, 1200, 600, 1500, 1000, 800]


def quarter(x):
    return round(x * 4) / 4


with open("toy_week_raw.csv", "w") as f:
    f.write("timestamp,wind_mwh,solar_mwh\n")
    for h in range(168):
        day, hour = divmod(h, 24)
        wind = rng.uniform(0, 200)
        solar = 0.0
        if 8 <= hour <= 16:
            solar = solar_peaks[day] * math.sin(math.pi * (hour - 7) / 10)
        for q in range(4):
            ts = start + timedelta(hours=h, minutes=15 * q)
            w = quarter(wind / 4 * rng.uniform(0.9, 1.1))
            s = quarter(solar / 4 * rng.uniform(0.95, 1.05))
            f.write(f"{ts.strftime('%Y-%m-%dT%H:%M:%SZ')},{w:g},{s:g}\n")

prices = [250] * 8 + [160] * 8 + [390] * 5 + [250] * 3
with open("tou_prices.csv", "w") as f:
    f.write("hour,price_usd_per_mwh\n")
    for h, p in enumerate(prices):
        f.write(f"{h},{p}\n")
