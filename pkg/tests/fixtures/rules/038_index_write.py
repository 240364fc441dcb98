items[0] = last
