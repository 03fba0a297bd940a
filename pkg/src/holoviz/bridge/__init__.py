"""rosbridge wire protocol: envelope codec, message codecs, and the client."""

from .envelope import BridgeOp, decode, encode
from .messages import (
    MARKER_ARRAY,
    POSE_STAMPED,
    STRING,
    TF_MESSAGE,
    CommandString,
    Marker,
    MarkerAction,
    MarkerArray,
    MarkerType,
    PoseStamped,
    RGBA,
    TFMessage,
    decode_msg,
    encode_msg,
)
from .client import BridgeClient, LocalBus, TopicBus

__all__ = [
    "BridgeOp",
    "decode",
    "encode",
    "TF_MESSAGE",
    "MARKER_ARRAY",
    "POSE_STAMPED",
    "STRING",
    "TFMessage",
    "Marker",
    "MarkerArray",
    "MarkerType",
    "MarkerAction",
    "PoseStamped",
    "CommandString",
    "RGBA",
    "decode_msg",
    "encode_msg",
    "BridgeClient",
    "LocalBus",
    "TopicBus",
]
