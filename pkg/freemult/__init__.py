"""Project package: configuration and the command-line front-end."""
