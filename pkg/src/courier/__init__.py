"""Robot product delivery with DID/VC customer verification and PUF robot verification."""
