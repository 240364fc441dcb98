# setup
x = 1

# loop over values
for v in values:
    # accumulate
    x += v

print(x)
