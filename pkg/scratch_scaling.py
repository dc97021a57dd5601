import sys, time
sys.path.insert(0, "src")
from fractions import Fraction as F

from momentpoly.scaling import (epsilon_bound, tensor_scale, Outcome,
                                scaling_certificate, replay_certificate,
                                verify_polytope, Verdict,
                                max_candidate_norm)
from momentpoly.tensors import named_tensor, Tensor
from momentpoly.polytopes import Polytope, kronecker_polytope

# --- epsilon arithmetic
eb = epsilon_bound((3, 3, 3), [F(2,5),F(1,3),F(4,15)]*3, 16)
print("eps(3,3,3) l=15 C=16:", eb.epsilon, eb.ell)
assert eb.epsilon == F(1, 721) and eb.ell == 15

p12 = [F(5,12),F(1,3),F(1,4),F(0)]*3
eb = epsilon_bound((4, 4, 4), p12, 43)
print("eps(4,4,4) l=12 C=43:", eb.epsilon)
assert eb.epsilon == F(1, 2065)

p24 = [F(3,8),F(1,3),F(7,24),F(0)]*3
eb = epsilon_bound((4, 4, 4), p24, 43)
print("eps(4,4,4) l=24 C=43:", eb.epsilon)
assert eb.epsilon == F(1, 4129)

# --- unit3 at uniform: certified immediately
u3 = named_tensor("unit3")
print("unit3 shape:", u3.shape)
uni = [F(1,3)]*9
r = tensor_scale(u3, uni, F(1,721), seed=1)
print("unit3 uniform:", r.outcome, "iters", r.iterations, "d", r.distance)
assert r.outcome is Outcome.CERTIFIED and r.iterations == 0

# --- padded W at (2/3,1/3,0)^3
w3 = named_tensor("W")
print("W shape:", w3.shape)
pw = [F(2,3),F(1,3),F(0)]*3
t0 = time.time()
r = tensor_scale(w3, pw, F(1,721), seed=3)
print("W (2/3,1/3,0)^3:", r.outcome, "iters", r.iterations,
      "d", r.distance, f"{time.time()-t0:.2f}s")
assert r.outcome is Outcome.CERTIFIED
cert = scaling_certificate(w3, pw, r)
print("replay:", replay_certificate(cert))
assert replay_certificate(cert)

# tamper
cert["distance_sq"]["num"] += 1
print("tampered replay:", replay_certificate(cert))
assert not replay_certificate(cert)

# --- native W fixtures
w2 = named_tensor("T21")
print("T21 shape:", w2.shape)
wpoly = Polytope.from_vertices((2,2,2), [
    [F(1),F(0),F(1),F(0),F(1),F(0)],
    [F(1),F(0),F(1,2),F(1,2),F(1,2),F(1,2)],
    [F(1,2),F(1,2),F(1),F(0),F(1,2),F(1,2)],
    [F(1,2),F(1,2),F(1,2),F(1,2),F(1),F(0)],
])
print("C(2,2,2) =", max_candidate_norm((2,2,2)))
t0 = time.time()
rep = verify_polytope(w2, wpoly.facets, mode="probabilistic", seed=11)
print("verify(W, dW):", rep.verdict, rep.vertices_checked, rep.detail,
      f"{time.time()-t0:.2f}s")
assert rep.verdict is Verdict.CORRECT

k222 = kronecker_polytope((2,2,2))
t0 = time.time()
rep = verify_polytope(w2, k222.inequalities, mode="probabilistic", seed=11)
print("verify(W, K222):", rep.verdict, rep.detail, rep.failed_point,
      f"{time.time()-t0:.2f}s")
assert rep.verdict is Verdict.INCORRECT

print("ALL SMOKE OK")
