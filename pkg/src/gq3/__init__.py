"""Third q-central quotients of finitely presented pro-p groups, the
low-degree cohomology models that determine them, and mod-q Milnor
K-ring presets for concrete fields."""

__version__ = "0.1.0"
