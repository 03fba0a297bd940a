"""Exception types shared across the engine."""

from __future__ import annotations


class HolovizError(Exception):
    """Base class for all engine errors."""


# geometry

class DegenerateDirection(HolovizError):
    """A direction was requested from two (nearly) coincident points."""


# transform tree

class TxGraphError(HolovizError):
    pass


class UnknownFrame(TxGraphError):
    """Frame has never been seen by the tree."""


class Disconnected(TxGraphError):
    """No common ancestor between the two frames."""


class ExtrapolationTooFar(TxGraphError):
    """Requested time is outside the buffered span beyond the clamp tolerance."""


class CycleRejected(TxGraphError):
    """Inserting the edge would create a parent-link cycle."""


# bridge

class BridgeError(HolovizError):
    pass


class ConnectRefused(BridgeError):
    """Endpoint unreachable after the configured retry budget."""


class EncodeError(BridgeError):
    """Message cannot be encoded under the declared type."""


class DecodeError(BridgeError):
    """Bytes or payload cannot be decoded; carries position/reason."""


class TypeMismatch(BridgeError):
    """Incoming payload failed to decode as the subscribed type."""


# plugins

class PluginError(HolovizError):
    pass


class DuplicateId(PluginError):
    pass


class UnknownType(PluginError):
    pass


class UnknownId(PluginError):
    pass


class InvalidSetting(PluginError):
    """Unknown settings key or value outside its schema."""


class InvalidTopic(PluginError):
    pass


# scene / sessions

class EpochGap(HolovizError):
    """Diff epoch does not follow the snapshot epoch; client must resync."""


# configuration

class ConfigError(HolovizError):
    """Invalid configuration; message names the offending field path."""


# mockros

class BindError(HolovizError):
    pass
