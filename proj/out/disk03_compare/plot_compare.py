#!/usr/bin/env python3
# Error against series order from compare.csv
import csv
import io
import math
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

DATA = """alpha_x,alpha_y,k,z,branch,order,beta_series,beta_oracle,observed,bound,slack,certified,status
3.1415926535897931,0,200,0.0050000000000000001,0,1,0.015715260457852365,0.015719514128172202,4.2536703198370329e-06,0.00071618838162852369,2.2222266956029526e-07,1,PASS
3.1415926535897931,0,200,0.0050000000000000001,0,2,0.015718517518201761,0.015719514128172202,9.966099704418474e-07,0.00022995968846061738,2.2222266956029526e-07,1,PASS
3.1415926535897931,0,200,0.0050000000000000001,0,3,0.015718555673082907,0.015719514128172202,9.5845508929492951e-07,7.3837358540581615e-05,2.2222266956029526e-07,1,PASS
3.1415926535897931,0,400,0.0025000000000000001,0,1,0.015638808335305204,0.015640085481417786,1.2771461125812844e-06,0.00014480472215525991,2.9458596646508729e-07,1,PASS
3.1415926535897931,0,400,0.0025000000000000001,0,2,0.015639622600392554,0.015640085481417786,4.6288102523162067e-07,2.3247548863283334e-05,2.9458596646508729e-07,1,PASS
3.1415926535897931,0,400,0.0025000000000000001,0,3,0.015639627369752697,0.015640085481417786,4.5811166508868961e-07,3.7322576232788606e-06,2.9458596646508729e-07,1,PASS
3.1415926535897931,0,33.333333333333336,0.029999999999999999,0,1,0.016479781683324004,0.016613228781090766,0.00013344709776676178,inf,4.9903433088684903e-06,0,UNCERTIFIED
3.1415926535897931,0,33.333333333333336,0.029999999999999999,0,2,0.01659703585590222,0.016613228781090766,1.6192925188545509e-05,inf,4.9903433088684903e-06,0,UNCERTIFIED
3.1415926535897931,0,33.333333333333336,0.029999999999999999,0,3,0.016605277310230229,0.016613228781090766,7.9514708605371576e-06,inf,4.9903433088684903e-06,0,UNCERTIFIED
"""

rows = list(csv.DictReader(io.StringIO(DATA))) if DATA.strip() else []
out = sys.argv[1] if len(sys.argv) > 1 else __file__.rsplit(".", 1)[0] + ".png"
fig, ax = plt.subplots(figsize=(7, 4.5))
series = {}
for r in rows:
    if r["status"] == "UNCERTIFIED":
        continue
    key = (r["alpha_x"], r["alpha_y"], r["z"], r["branch"])
    series.setdefault(key, []).append((int(r["order"]), float(r["observed"]), float(r["bound"])))
for (ax_, ay_, z, b), pts in sorted(series.items()):
    pts.sort()
    p = [q[0] for q in pts]
    line, = ax.semilogy(p, [max(q[1], 1e-300) for q in pts], "o-",
                        label=f"alpha=({float(ax_):.3g},{float(ay_):.3g}) z={float(z):.3g} j={b}")
    ax.semilogy(p, [q[2] for q in pts], "--", color=line.get_color())
ax.set_xlabel("order p")
ax.set_ylabel("|beta_series - beta_oracle| (dashed: bound)")
if rows:
    ax.legend(fontsize="small")
else:
    ax.set_title("no data")
fig.tight_layout()
fig.savefig(out, dpi=150)
print(out)
