namespace ringsqueeze {}
