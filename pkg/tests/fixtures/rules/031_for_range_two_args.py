for i in range(2, 8):
    print(i)
