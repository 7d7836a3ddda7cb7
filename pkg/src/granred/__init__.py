"""Semi-supervised attribute reduction with granular conditional entropy."""
