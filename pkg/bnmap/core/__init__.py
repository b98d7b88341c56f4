"""Network data model, numeric backends, validation and BNM/QRY file I/O."""
