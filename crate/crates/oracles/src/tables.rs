//! Frozen numerical reference data.
//!
//! Values were computed offline with 60-digit arithmetic and rounded to the
//! nearest f64, so they are exact to the last bit of the double format.

/// (x, log_phi(x), hazard(x)) computed at 60-digit precision.
pub const LOGPHI_HAZARD: [(f64, f64, f64); 110] = [
    (-40.0, -804.6084420137538, 0.0),
    (-39.5, -784.7208791043175, 0.0),
    (-39.0, -765.0831565643775, 0.0),
    (-38.5, -745.695270290411, 5.4e-323),
    (-38.0, -726.5572160188201, 1.097221052e-314),
    (-37.5, -707.6689893175072, 1.7282337322841054e-306),
    (-37.31, -700.5569670070147, 2.109170292795629e-303),
    (-37.0, -689.0305855768906, 2.1200065515246056e-298),
    (-36.5, -670.6420000003137, 2.025341716211746e-290),
    (-36.0, -652.5032275937984, 1.5069047176203946e-282),
    (-35.5, -634.6142631550883, 8.73171710062051e-275),
    (-35.0, -616.9751012619225, 3.940396277136024e-267),
    (-34.5, -599.5857362594724, 1.3848620783379355e-259),
    (-34.0, -582.4461622468717, 3.790526400092868e-252),
    (-33.5, -565.556373062758, 8.080140413872447e-245),
    (-33.0, -548.9163622697381, 1.341419667349436e-237),
    (-32.5, -532.5261231376803, 1.7343502636064353e-230),
    (-32.0, -516.3856486257254, 1.746366256758777e-223),
    (-31.5, -500.4949313628971, 1.3694943080797672e-216),
    (-31.0, -484.85396362717927, 8.363951605856462e-210),
    (-30.5, -469.4627373229121, 3.97822342728212e-203),
    (-30.0, -454.3212439563432, 1.4736461348785476e-196),
    (-29.999, -454.2912111961238, 1.51852458186625e-196),
    (-29.5, -439.42947460915025, 4.2513183535275504e-190),
    (-29.0, -424.78741990973015, 9.551694541948838e-184),
    (-28.5, -410.3950700020256, 1.67133536513008e-177),
    (-28.0, -396.25241451163106, 2.277577478736661e-171),
    (-27.5, -382.35944250888986, 2.41718057861955e-165),
    (-27.0, -368.71614246865636, 1.9978892591682794e-159),
    (-26.5, -355.322502226356, 1.2860566740713691e-153),
    (-26.0, -342.17850892992783, 6.447259971397852e-148),
    (-25.5, -329.28414898717955, 2.5171937051934048e-142),
    (-25.0, -316.63940800802027, 7.653929736419392e-137),
    (-24.5, -304.2442707409637, 1.8125027935515248e-131),
    (-24.0, -292.0987210032078, 3.342714441794458e-126),
    (-23.5, -280.20274160349766, 4.801160785906881e-121),
    (-23.0, -268.5563142568631, 5.370560365020592e-116),
    (-22.5, -257.1594194901842, 4.678636817250046e-111),
    (-22.0, -246.0120365373809, 3.174281552825262e-106),
    (-21.5, -235.114143222833, 1.6772505228543915e-101),
    (-21.0, -224.46571583141449, 6.902029420127219e-97),
    (-20.5, -214.0667289632638, 2.2119843802105703e-92),
    (-20.0, -203.91715537109727, 5.520948362159764e-88),
    (-19.5, -194.0169657774975, 1.0731778340682652e-83),
    (-19.0, -184.36612866916096, 1.624636036773608e-79),
    (-18.5, -174.9646100645466, 1.9154324916719355e-75),
    (-18.0, -165.8123732507142, 1.7587495425951037e-71),
    (-17.5, -156.9093784843464, 1.2576723828781936e-67),
    (-17.0, -148.2555826509804, 7.004182134318581e-64),
    (-16.5, -139.8509388752852, 3.037901698789923e-60),
    (-16.0, -131.6953960737597, 1.0261630727919036e-56),
    (-15.5, -123.78889843941037, 2.699513024588587e-53),
    (-15.0, -116.1313848457117, 5.530709549844416e-50),
    (-14.5, -108.72278815432047, 8.824754974594823e-47),
    (-14.0, -101.56303440744996, 1.0966065593889713e-43),
    (-13.5, -94.6520418812829, 1.061268813915216e-40),
    (-13.0, -87.98971997102252, 7.998827757006812e-38),
    (-12.5, -81.57596787074388, 4.695195357975146e-35),
    (-12.0, -75.4106730015688, 2.1463837356630605e-32),
    (-11.5, -69.49370912909535, 7.641655411587203e-30),
    (-11.0, -63.82493409442372, 2.1188192535093534e-27),
    (-10.5, -58.404187061073245, 4.575375590520806e-25),
    (-10.0, -53.23128515051247, 7.694598626706419e-23),
    (-9.5, -48.30601929896523, 1.007793539430001e-20),
    (-9.0, -43.628149113332114, 1.0279773571668915e-18),
    (-8.5, -39.19739642821767, 8.16623563166955e-17),
    (-8.125, -36.03630982124421, 1.84416271541667e-15),
    (-8.0, -35.01343715991455, 5.052271083536895e-15),
    (-7.99, -34.93227276199891, 5.4727862810285115e-15),
    (-7.5, -31.075890902890002, 2.4343205330290874e-13),
    (-7.0, -27.384307498811076, 9.134720408376284e-12),
    (-6.5, -23.938149495161838, 2.669556614870061e-10),
    (-6.0, -20.736768949974707, 6.075882855817676e-09),
    (-5.5, -17.77937635262526, 1.0769760247056311e-07),
    (-5.0, -15.064998393988725, 1.4867199409049056e-06),
    (-4.5, -12.59241973571308, 1.5983795414617587e-05),
    (-4.0, -10.360101486527292, 0.00013383446446857514),
    (-3.7, -9.135235371872877, 0.00042482606668751456),
    (-3.5, -8.366065308344092, 0.000872885753654736),
    (-3.0, -6.607726221510349, 0.004437839042125664),
    (-2.5, -5.08164827727869, 0.017637825486916735),
    (-2.0, -3.783184333682032, 0.055247862678989956),
    (-1.5, -2.7059444008238898, 0.13878975045885075),
    (-1.0, -1.8410216450092636, 0.2875999709391784),
    (-0.5, -1.1759117615936185, 0.5091604338370335),
    (-0.1, -0.7761545927302733, 0.7353317485057806),
    (0.0, -0.6931471805599453, 0.7978845608028654),
    (0.1, -0.6165050101150263, 0.8626174715309362),
    (0.5, -0.3689464152886564, 1.1410777703680646),
    (1.0, -0.17275377902344988, 1.525135276160981),
    (1.5, -0.06914345561223398, 1.938677166622543),
    (2.0, -0.02301290932896349, 2.373215532822841),
    (2.25, -0.012299806091449409, 2.596402538686962),
    (2.5, -0.006229025485860002, 2.822744797663907),
    (3.0, -0.0013508099647481938, 3.2830986549304364),
    (3.5, -0.00023265614137680455, 3.7513912648576997),
    (4.0, -3.167174337748927e-05, 4.225607144489471),
    (4.5, -3.397678896834466e-06, 4.704319844827732),
    (5.0, -2.866516129637636e-07, 5.186503967125842),
    (5.5, -1.8989562646189464e-08, 5.671410313897305),
    (6.0, -9.865876455243758e-10, 6.158482604544599),
    (6.5, -4.016000583939759e-11, 6.6473013611904905),
    (7.0, -1.279812543886654e-12, 7.137545613226504),
    (7.5, -3.190891672910947e-14, 7.6289663911037655),
    (8.0, -6.220960574271786e-16, 8.121368112236112),
    (8.5, -9.479534822203318e-18, 8.614595320165172),
    (9.0, -1.1285884059538405e-19, 9.108523105002869),
    (9.5, -1.0494515075362608e-21, 9.603050090384283),
    (9.75, -9.223413524939418e-23, 9.850511730185426),
    (10.0, -7.619853024160525e-24, 10.098093233962512),
];

/// Gauss-Hermite nodes/weights, n=32 (physicists' weight e^{-t^2}).
pub const GH32: [(f64, f64); 32] = [
    (-7.125813909830727, 7.310676427384163e-23),
    (-6.409498149269661, 9.231736536518292e-19),
    (-5.812225949515914, 1.1973440170928487e-15),
    (-5.2755509865158805, 4.2150102113264474e-13),
    (-4.777164503502596, 5.933291463396639e-11),
    (-4.305547953351199, 4.098832164770897e-09),
    (-3.853755485471445, 1.574167792545594e-07),
    (-3.417167492818571, 3.650585129562376e-06),
    (-2.992490825002374, 5.4165840618199826e-05),
    (-2.5772495377323175, 0.000536268365527972),
    (-2.169499183606112, 0.003654890326654428),
    (-1.7676541094632017, 0.01755342883157343),
    (-1.3703764109528718, 0.06045813095591261),
    (-0.9765004635896828, 0.1512697340766425),
    (-0.5849787654359324, 0.2774581423025299),
    (-0.19484074156939932, 0.3752383525928024),
    (0.19484074156939932, 0.3752383525928024),
    (0.5849787654359324, 0.2774581423025299),
    (0.9765004635896828, 0.1512697340766425),
    (1.3703764109528718, 0.06045813095591261),
    (1.7676541094632017, 0.01755342883157343),
    (2.169499183606112, 0.003654890326654428),
    (2.5772495377323175, 0.000536268365527972),
    (2.992490825002374, 5.4165840618199826e-05),
    (3.417167492818571, 3.650585129562376e-06),
    (3.853755485471445, 1.574167792545594e-07),
    (4.305547953351199, 4.098832164770897e-09),
    (4.777164503502596, 5.933291463396639e-11),
    (5.2755509865158805, 4.2150102113264474e-13),
    (5.812225949515914, 1.1973440170928487e-15),
    (6.409498149269661, 9.231736536518292e-19),
    (7.125813909830727, 7.310676427384163e-23),
];

/// Gauss-Legendre nodes/weights, n=7, on [-1, 1].
pub const GL7: [(f64, f64); 7] = [
    (-0.9491079123427585, 0.1294849661688697),
    (-0.7415311855993945, 0.27970539148927664),
    (-0.4058451513773972, 0.3818300505051189),
    (0.0, 0.4179591836734694),
    (0.4058451513773972, 0.3818300505051189),
    (0.7415311855993945, 0.27970539148927664),
    (0.9491079123427585, 0.1294849661688697),
];

/// Gauss-Legendre nodes/weights, n=15, on [-1, 1].
pub const GL15: [(f64, f64); 15] = [
    (-0.9879925180204854, 0.03075324199611727),
    (-0.937273392400706, 0.07036604748810812),
    (-0.8482065834104272, 0.10715922046717194),
    (-0.7244177313601701, 0.13957067792615432),
    (-0.5709721726085388, 0.16626920581699392),
    (-0.3941513470775634, 0.1861610000155622),
    (-0.20119409399743451, 0.19843148532711158),
    (0.0, 0.2025782419255613),
    (0.20119409399743451, 0.19843148532711158),
    (0.3941513470775634, 0.1861610000155622),
    (0.5709721726085388, 0.16626920581699392),
    (0.7244177313601701, 0.13957067792615432),
    (0.8482065834104272, 0.10715922046717194),
    (0.937273392400706, 0.07036604748810812),
    (0.9879925180204854, 0.03075324199611727),
];
