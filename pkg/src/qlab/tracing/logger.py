import logging

logger = logging.getLogger("qlab.tracing")
