"""Host-level web content quality scoring from fused link, content and text features."""

__version__ = "0.1.0"
