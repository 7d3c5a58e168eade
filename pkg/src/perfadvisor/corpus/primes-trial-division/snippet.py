# Primes by checking every smaller divisor.
primes = []
for n in range(2, 4000):
    is_prime = True
    for d in range(2, n):
        if n % d == 0:
            is_prime = False
            break
    if is_prime:
        primes.append(n)
print(len(primes), primes[-1])
