"""Problem generator, file formats, benchmarks and the command line."""
