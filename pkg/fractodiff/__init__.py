import runpy

__version__ = "0.3.0"


def main():
    runpy._run_module_as_main("fractodiff.numerics.cli")
