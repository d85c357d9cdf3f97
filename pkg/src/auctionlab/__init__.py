"""auctionlab: strategic bid shading against revenue-maximizing auctions."""

__version__ = "0.1.0"
