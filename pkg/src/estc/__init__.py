"""Scene-based topic channel construction engine."""

__version__ = "0.1.0"

from .catalog import LabeledPair, Product, ProfileFeatures, TopicTitle  # noqa: F401
from .qc import Channel, ChannelStatus  # noqa: F401
