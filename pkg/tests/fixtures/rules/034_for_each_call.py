for key in d.keys():
    print(key)
