#!/usr/bin/env python3
# Band diagram from band.csv
import csv
import io
import math
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

DATA = """alpha_x,alpha_y,k,z,branch,lambda_series,lambda_oracle,error_bound,certified,r_star,d,mu_minus
0,0,200,0.0050000000000000001,0,79.614885512625861,,0.0015485969947234628,1,0.054848324448709899,0.0032152185933961835,-0.038362885247419154
0.19634954084936207,0,200,0.0050000000000000001,0,0.1761849650620407,,inf,0,6.4564942263738349e-05,0.0047161944541919644,-0.1448627704531078
0.39269908169872414,0,200,0.0050000000000000001,0,7.1776840984791974,,inf,0,0.00025792863983244624,0.0047161944541919644,-0.14519327997829104
0.58904862254808621,0,200,0.0050000000000000001,0,29.504429219678951,,inf,0,0.00057912942556342278,0.0047161944541919644,-0.14572516426535689
0.78539816339744828,0,200,0.0050000000000000001,0,46.498919165266216,,inf,0,0.0010266648638161248,0.0047161944541919644,-0.14643180117262722
0.98174770424681035,0,200,0.0050000000000000001,0,54.437182026595522,,inf,0,0.0015986250996335187,0.0047161944541919644,-0.14727919846914311
1.1780972450961724,0,200,0.0050000000000000001,0,58.21828902828225,,inf,0,0.0022928504820753409,0.0047161944541919644,-0.14822853889847479
1.3744467859455345,0,200,0.0050000000000000001,0,60.23596458958702,,inf,0,0.0031070940891646868,0.0047161944541919644,-0.14923867650939815
1.5707963267948966,0,200,0.0050000000000000001,0,61.424946507482531,,inf,0,0.0040391732047982713,0.0047161944541919644,-0.15026833394687469
1.7671458676442586,0,200,0.0050000000000000001,0,62.178534095110187,,993.87211176547487,1,0.0050870987018272187,0.0047161944541919644,-0.1512778752560551
1.9634954084936207,0,200,0.0050000000000000001,0,62.680695374421568,,37.988088698669031,1,0.0062491759796732237,0.0047161944541919644,-0.15223063343658891
2.1598449493429825,0,200,0.0050000000000000001,0,63.02576851009232,,10.890467583071983,1,0.0075240746836327454,0.0047161944541919644,-0.1530938392745404
2.3561944901923448,0,200,0.0050000000000000001,0,63.265711374468914,,4.2635921822178702,1,0.00891086670139302,0.0047161944541919644,-0.15383922931275756
2.5525440310417071,0,200,0.0050000000000000001,0,63.430610542012552,,1.9441004263628066,1,0.010409033103110869,0.0047161944541919644,-0.15444341644134132
2.748893571891069,0,200,0.0050000000000000001,0,63.538329008414173,,0.97669332468361336,1,0.012018441109243843,0.0047161944541919644,-0.15488809773803935
2.9452431127404308,0,200,0.0050000000000000001,0,63.599318806790286,,0.52602612638308699,1,0.013739292155154093,0.0047161944541919644,-0.15516015934860053
3.1415926535897931,0,200,0.0050000000000000001,0,63.619076764949888,,0.2988483597865495,1,0.015572041917928959,0.0047161944541919644,-0.15525172239002721
3.1415926535897931,0.19634954084936207,200,0.0050000000000000001,0,63.621605062328818,,0.28979965379453476,1,0.015679787272038205,0.0047161944541919644,-0.15419368295047306
3.1415926535897931,0.39269908169872414,200,0.0050000000000000001,0,63.629090124247178,,0.26470172699320149,1,0.016002264142661902,0.0047161944541919644,-0.15108281383386915
3.1415926535897931,0.58904862254808621,200,0.0050000000000000001,0,63.641236711325746,,0.22880336952356817,1,0.016537201444005438,0.0047161944541919644,-0.14610155349677578
3.1415926535897931,0.78539816339744828,200,0.0050000000000000001,0,63.657566699404356,,0.18847310023674166,1,0.017280838130853536,0.0047161944541919644,-0.1395310582206731
3.1415926535897931,0.98174770424681035,200,0.0050000000000000001,0,63.677439208568991,,0.14918839613248511,1,0.018227967494536042,0.0047161944541919644,-0.13172147978065171
3.1415926535897931,1.1780972450961724,200,0.0050000000000000001,0,63.700077286224136,,0.11447476225077721,1,0.019372013329040625,0.0047161944541919644,-0.12305820296094254
3.1415926535897931,1.3744467859455345,200,0.0050000000000000001,0,63.72459979741619,,0.085863605109465876,1,0.020705145615884497,0.0047161944541919644,-0.1139292124013733
3.1415926535897931,1.5707963267948966,200,0.0050000000000000001,0,63.750056983037148,,0.06343062924540116,1,0.022218432426512641,0.0047161944541919644,-0.10469771935577868
3.1415926535897931,1.7671458676442586,200,0.0050000000000000001,0,63.77546806235388,,0.046448186167197231,1,0.023901997235253956,0.0047161944541919644,-0.09568277896590402
3.1415926535897931,1.9634954084936207,200,0.0050000000000000001,0,63.799859273167328,,0.033893172978676424,1,0.025745095138422429,0.0047161944541919644,-0.087149503744569229
3.1415926535897931,2.1598449493429825,200,0.0050000000000000001,0,63.822300843892812,,0.024750077256375118,1,0.027735917198031028,0.0047161944541919644,-0.079310110666236208
3.1415926535897931,2.3561944901923448,200,0.0050000000000000001,0,63.841941554206286,,0.018149653498069143,1,0.029860736810069576,0.0047161944541919644,-0.072337838186269654
3.1415926535897931,2.5525440310417071,200,0.0050000000000000001,0,63.858039740053144,,0.013406801564227015,1,0.032101648345570818,0.0047161944541919644,-0.066398146717569759
3.1415926535897931,2.748893571891069,200,0.0050000000000000001,0,63.869989812040608,,0.010008673384396798,1,0.034431664867544502,0.0047161944541919644,-0.061703898702216736
3.1415926535897931,2.9452431127404308,200,0.0050000000000000001,0,63.877343565418947,,0.0075832835661347325,1,0.036806880660612051,0.0047161944541919644,-0.058585255834466131
3.1415926535897931,3.1415926535897931,200,0.0050000000000000001,0,63.879825753113096,,0.0058607144784878955,1,0.039164408084469138,0.0047161944541919644,-0.057469356973521533
2.9452431127404308,2.9452431127404308,200,0.0050000000000000001,0,63.874770315492924,,0.0099812928135128258,1,0.034455529651508103,0.0047161944541919644,-0.059608978822419487
2.748893571891069,2.748893571891069,200,0.0050000000000000001,0,63.858680696390444,,0.018291432514072871,1,0.02980920265448473,0.0047161944541919644,-0.064932109223281312
2.5525440310417071,2.5525440310417071,200,0.0050000000000000001,0,63.828652059462442,,0.035837429699944766,1,0.025414262274577801,0.0047161944541919644,-0.071932563420837911
2.3561944901923448,2.3561944901923448,200,0.0050000000000000001,0,63.779344434229237,,0.075257692750292968,1,0.021356503481595651,0.0047161944541919644,-0.079781315065090827
2.1598449493429825,2.1598449493429825,200,0.0050000000000000001,0,63.702037321571076,,0.17109196872958357,1,0.017670578447387387,0.0047161944541919644,-0.088018424471709322
1.9634954084936207,1.9634954084936207,200,0.0050000000000000001,0,63.582793240582177,,0.42886905147791615,1,0.014367929793918554,0.0047161944541919644,-0.096326842589785161
1.7671458676442586,1.7671458676442586,200,0.0050000000000000001,0,63.398833634709035,,1.2250951916223931,1,0.01144717497923759,0.0047161944541919644,-0.10445472695544786
1.5707963267948966,1.5707963267948966,200,0.0050000000000000001,0,63.110999354133455,,4.273071956974718,1,0.0088988633549572597,0.0047161944541919644,-0.11219163373556842
1.3744467859455345,1.3744467859455345,200,0.0050000000000000001,0,62.646766244390896,,22.427936680417123,1,0.0067084742648983149,0.0047161944541919644,-0.11936131233865052
1.1780972450961724,1.1780972450961724,200,0.0050000000000000001,0,61.857633622128986,,inf,0,0.0048587247132320108,0.0047161944541919644,-0.12581884828566645
0.98174770424681035,0.98174770424681035,200,0.0050000000000000001,0,60.395905654195303,,inf,0,0.0033314549894394099,0.0047161944541919644,-0.13144826859297418
0.78539816339744828,0.78539816339744828,200,0.0050000000000000001,0,57.287954504687157,,inf,0,0.0021091516260695903,0.0047161944541919644,-0.13615963716225968
0.58904862254808621,0.58904862254808621,200,0.0050000000000000001,0,49.175222777067873,,inf,0,0.0011761312438060272,0.0047161944541919644,-0.13988570247992704
0.39269908169872414,0.39269908169872414,200,0.0050000000000000001,0,25.615949268771999,,inf,0,0.00051941732564155755,0.0047161944541919644,-0.14257847567292398
0.19634954084936207,0.19634954084936207,200,0.0050000000000000001,0,1.2427903230609638,,inf,0,0.00012935350323274331,0.0047161944541919644,-0.14420614428768797
"""

rows = list(csv.DictReader(io.StringIO(DATA))) if DATA.strip() else []
out = sys.argv[1] if len(sys.argv) > 1 else __file__.rsplit(".", 1)[0] + ".png"
fig, ax = plt.subplots(figsize=(7, 4.5))
s, prev, coords = 0.0, None, []
for r in rows:
    a = (float(r["alpha_x"]), float(r["alpha_y"]))
    if prev is not None and a != prev:
        s += math.hypot(a[0] - prev[0], a[1] - prev[1])
    prev = a
    coords.append(s)
curves = {}
for r, x in zip(rows, coords):
    curves.setdefault((r["z"], r["branch"]), []).append((x, r))
for (z, b), pts in sorted(curves.items()):
    xs = [p[0] for p in pts]
    line, = ax.plot(xs, [float(p[1]["lambda_series"]) for p in pts], "-",
                    label=f"series z={float(z):.3g} j={b}")
    orc = [(p[0], float(p[1]["lambda_oracle"])) for p in pts if p[1]["lambda_oracle"]]
    if orc:
        ax.plot([o[0] for o in orc], [o[1] for o in orc], "o", mfc="none", color=line.get_color())
    bad = [p for p in pts if p[1]["certified"] != "1"]
    if bad:
        ax.plot([p[0] for p in bad], [float(p[1]["lambda_series"]) for p in bad], "x", color="red")
ax.set_xlabel("path coordinate |alpha|")
ax.set_ylabel("omega^2")
if rows:
    ax.legend(fontsize="small")
else:
    ax.set_title("no data")
fig.tight_layout()
fig.savefig(out, dpi=150)
print(out)
