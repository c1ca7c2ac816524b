"""Tracking an unstable random walk from coded increments.

The increments w_t of x_{t+1} = 1.2 x_t + w_t are sent one bit per step with
a rate 1/3 code.  The estimate uses every increment the decoder has
resolved; its squared error stays bounded because delays are rare and short
compared with the growth rate of the walk.
"""

from anytime_codes import ChannelModel, CodeParams, sample_tz
from anytime_codes.control import random_walk_demo

h = sample_tz(CodeParams(3, 1, 2000), 0.5, seed=5)
res = random_walk_demo(1.2, h, ChannelModel.bec(0.2), 2000, seed=6, trials=4)
for t in (10, 100, 500, 1000, 1999):
    print(f"t={t:>4}: running mean squared error {res.running_mean[t]:.4f}")
print("longest delay seen:", int(res.delays.max()))
