print(x, y, z)
