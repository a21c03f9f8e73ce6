from .config import Configuration, ConfigOption

config = Configuration()
