if a > 0:
    if b > 0:
        print(a, b)
