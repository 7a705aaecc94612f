"""Tweet-to-trade pipeline: price-labelled tweets, text classifiers, hourly backtests."""

__version__ = "0.1.0"
