y = x * 2 + 1
