if a >= b:
    print(a)
if a != b:
    print(b)
if a < b:
    print(a, b)
