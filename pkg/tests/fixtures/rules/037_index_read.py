first = items[0]
