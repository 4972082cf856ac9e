"""toricount - exact counts of rational curves on split toric varieties over finite fields."""

__version__ = "0.1.0"
