"""Was it luck?  Binomial tails, frame adjustment and the Sharpe ratio."""
from decimal import Decimal

from tweetsignal.backtest import annualize, net_of_fees
from tweetsignal.stats import binom_pmf, binom_survival, frame_adjust, sharpe, significance

# 253 of 468 trades correct, with a test month picked from 85 days of data
s = significance(468, 253, 0.5, frames=85 / 20)
for key in ("pmf", "survival", "survival_above", "frame_adjusted_pmf", "frame_adjusted_survival_above"):
    print(f"{key:32s} {s[key]:.4%}")

# the tail "at least 253" and the tail "more than 253" differ by one pmf term
print(binom_survival(468, 253, 0.5) - binom_survival(468, 254, 0.5), binom_pmf(468, 253, 0.5))
print("frames 1 changes nothing:", frame_adjust(0.3, 1))

# account arithmetic: $729.50 on a $13,420 account
r = Decimal("729.50") / Decimal("13420")
print(f"monthly {float(r):.3%}  net {float(net_of_fees(r)):.3%}  annualised {annualize(r):.1%}")

strategy = [0.004, -0.002, 0.011, 0.006, -0.001, 0.008]
benchmark = [0.001, 0.002, 0.003, -0.004, 0.000, 0.002]
print("sharpe:", round(sharpe(strategy, benchmark), 3))
