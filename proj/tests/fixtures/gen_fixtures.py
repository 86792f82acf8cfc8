# Copyright 2026 The stochnet Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Regenerates the frozen oracle fixtures with 50-digit arithmetic.

Usage: python3 gen_fixtures.py  (writes next to this script)
"""

import itertools
import os

import mpmath as mp

mp.mp.dps = 50
HERE = os.path.dirname(os.path.abspath(__file__))


def sigm(a):
    return 1 / (1 + mp.e ** (-a))


# 2-3-2 sigmoid net. Rows: weights in source order, then bias.
X = [mp.mpf("0.3"), mp.mpf("-0.7")]
W1 = [["0.8", "-1.2", "0.1"], ["-0.5", "0.9", "-0.3"], ["1.5", "0.4", "0.2"]]
W2 = [["1.1", "-0.7", "0.6", "-0.2"], ["-0.9", "1.3", "-1.4", "0.5"]]


def enumeration_table():
    w1 = [[mp.mpf(v) for v in row] for row in W1]
    w2 = [[mp.mpf(v) for v in row] for row in W2]
    rows = []
    for z in itertools.product([0, 1], repeat=3):
        p = mp.mpf(1)
        for u in range(3):
            a = w1[u][0] * X[0] + w1[u][1] * X[1] + w1[u][2]
            q = sigm(a)
            p *= q if z[u] else 1 - q
        for y in itertools.product([0, 1], repeat=2):
            py = mp.mpf(1)
            for v in range(2):
                a = sum(w2[v][k] * z[k] for k in range(3)) + w2[v][3]
                q = sigm(a)
                py *= q if y[v] else 1 - q
            rows.append((z + y, p * py))
    return rows


def write_enumeration():
    rows = enumeration_table()
    marg = [mp.mpf(0)] * 5
    for key, p in rows:
        for i, bit in enumerate(key):
            if bit:
                marg[i] += p
    with open(os.path.join(HERE, "enum_2_3_2.txt"), "w") as f:
        f.write("# 2-3-2 sigmoid net, exact joint p(z, y | x)\n")
        f.write("x " + " ".join(str(v) for v in X) + "\n")
        for row in W1:
            f.write("layer1 " + " ".join(row) + "\n")
        for row in W2:
            f.write("layer2 " + " ".join(row) + "\n")
        for key, p in rows:
            f.write("p " + " ".join(map(str, key)) + " " +
                    mp.nstr(p, 20, strip_zeros=False) + "\n")
        f.write("marginals " + " ".join(mp.nstr(m, 20, strip_zeros=False)
                                        for m in marg) + "\n")


def write_scalars():
    a = mp.mpf(2)
    values = {
        "sigmoid_log_p1_at_2": mp.log(mp.e ** a / (1 + mp.e ** a)),
        "relusum8_mean_at_2": sum(sigm(a - i + mp.mpf("0.5"))
                                  for i in range(1, 9)),
        "relusum8_slope_at_2": sum(sigm(a - i + mp.mpf("0.5")) *
                                   (1 - sigm(a - i + mp.mpf("0.5")))
                                   for i in range(1, 9)),
        "tanh_log_pm1_at_0.5": -mp.mpf("0.5") - mp.log(mp.e ** mp.mpf("0.5") +
                                                      mp.e ** mp.mpf("-0.5")),
    }
    with open(os.path.join(HERE, "scalars.txt"), "w") as f:
        for k, v in values.items():
            f.write(f"{k} {mp.nstr(v, 20, strip_zeros=False)}\n")


if __name__ == "__main__":
    write_enumeration()
    write_scalars()
