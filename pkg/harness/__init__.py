# Harness Package
