if flag:
    y = 1
else:
    y = 2
