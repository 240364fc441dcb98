cell = grid[row][col]
