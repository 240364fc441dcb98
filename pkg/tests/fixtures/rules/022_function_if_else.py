def classify(value, limit):
    label = ""
    if value > limit:
        label = "high"
        print(label)
    else:
        label = "low"
        print(label)
    count = len(label)
    if count == 0:
        return label
    return count
