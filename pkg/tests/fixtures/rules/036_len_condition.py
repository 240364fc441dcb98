if len(word) > 3:
    print(word)
