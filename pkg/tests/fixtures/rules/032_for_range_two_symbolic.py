for k in range(start, stop):
    print(k)
