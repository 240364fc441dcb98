def reset():
    x = 0
