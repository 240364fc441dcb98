result *= factor
