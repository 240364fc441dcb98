if x == 0:
    y = 0
elif x == 1:
    y = 10
elif x == 2:
    y = 20
