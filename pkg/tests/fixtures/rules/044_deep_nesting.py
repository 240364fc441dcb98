def scan(rows, needle):
    hits = 0
    for row in rows:
        i = 0
        while i < len(row):
            if row[i] == needle:
                hits += 1
            i += 1
    return hits
