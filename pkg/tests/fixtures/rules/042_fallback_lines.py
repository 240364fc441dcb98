pass
yield x
del cache
