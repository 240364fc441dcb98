middle = data[1:4]
