"""Model provider sidecar.

Loads a sentence encoder (mean pooling over token outputs) and a
summarization model, and answers dim/embed/summarize requests over the
line-delimited JSON wire protocol, on stdio or a local HTTP port.
"""

from .session import HashEncoder, MeanPoolingEncoder, ProviderSession, Seq2SeqSummarizer

__all__ = ["HashEncoder", "MeanPoolingEncoder", "ProviderSession", "Seq2SeqSummarizer"]

__version__ = "0.1.0"
