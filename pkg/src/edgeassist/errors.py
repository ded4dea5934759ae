"""Exception hierarchy shared across the gateway."""

from __future__ import annotations


class EdgeAssistError(Exception):
    """Base class for all gateway errors."""


# audio front-end
class EmptySignal(EdgeAssistError):
    pass


class FrameMismatch(EdgeAssistError):
    pass


class SpectrumMismatch(EdgeAssistError):
    pass


class EmptyFeatures(EdgeAssistError):
    pass


class WavFormatError(EdgeAssistError):
    pass


# ASR
class AsrError(EdgeAssistError):
    pass


class AsrTimeout(AsrError):
    pass


class AsrUnavailable(AsrError):
    pass


class LowConfidence(AsrError):
    def __init__(self, message: str, confidence: float = 0.0, text: str = ""):
        super().__init__(message)
        self.confidence = confidence
        self.text = text


# cache
class EmptyResponse(EdgeAssistError):
    pass


class UnknownEntry(EdgeAssistError):
    pass


class CorruptCacheFile(EdgeAssistError):
    pass


class IoFailure(EdgeAssistError):
    pass


# context hub
class DuplicateSensor(EdgeAssistError):
    pass


class InvalidProfile(EdgeAssistError):
    pass


# controller
class CloudError(EdgeAssistError):
    pass


class CloudUnreachable(CloudError):
    pass


class CloudTimeout(CloudError):
    pass


class MalformedCloudResponse(CloudError):
    pass


class ToolLoopExceeded(CloudError):
    def __init__(self, message: str, iterations: int):
        super().__init__(message)
        self.iterations = iterations


class AdapterFailure(EdgeAssistError):
    pass


# actions
class DuplicateDevice(EdgeAssistError):
    pass


class UnknownInteraction(EdgeAssistError):
    pass


# gateway
class ConfigError(EdgeAssistError):
    pass


class UnsupportedModality(EdgeAssistError):
    pass


class BadRequest(EdgeAssistError):
    pass


class TierUnavailable(EdgeAssistError):
    """No tier could produce an answer; carries the apologetic reply."""

    def __init__(self, message: str, reply: str = ""):
        super().__init__(message)
        self.reply = reply
