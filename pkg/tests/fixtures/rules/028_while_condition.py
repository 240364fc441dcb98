while count <= limit:
    count += step
    print(count)
