budget -= cost
