total /= n
