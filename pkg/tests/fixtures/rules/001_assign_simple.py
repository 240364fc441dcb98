x = 5
