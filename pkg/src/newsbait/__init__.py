"""Clickbait scoring of news-crawl archives with interrupted time series analysis."""

__version__ = "0.1.0"
