"""fairkit: make research data FAIR from the moment of creation.

Checksummed BagIt packaging, lightweight persistent identifiers, a
versioned entity-relationship metadata catalog, and resumable
publication flows, usable as a library, a CLI (``fair``), and an HTTP
service.
"""

__version__ = "0.1.0"
