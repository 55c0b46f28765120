"""Online epsilon-nets and online piercing for geometric ranges."""

__version__ = "0.1.0"
