// (d, n, h, alpha, c, surface measure, crossing count, b̂ or NaN for d = 1, â)
#[rustfmt::skip]
#[allow(clippy::excessive_precision, clippy::type_complexity)]
const CASES: [(usize, usize, f64, f64, f64, f64, usize, f64, f64); 50] = [
    (1, 50, 0.288342, 0.47232, 0.277291, 7.793256, 4, f64::NAN, 0.14440270798442795103),
    (2, 1000, 0.22212, 0.303103, 0.037374, 13.031247, 2, 3.6502886587425682905, 0.099486223485563682379),
    (2, 20000, 0.769242, 0.295464, 0.271841, 34.182118, 1, 6.6854369741524215618, 0.031728380319852124843),
    (2, 50, 0.713704, 0.472082, 0.274707, 31.262582, 2, 5.2381266102394867062, 0.53869920169480629357),
    (3, 50, 0.071795, 0.213765, 0.035365, 17.155087, 1, 4.8308572655710441321, 6.581011514328181576),
    (1, 5000, 0.092537, 0.056972, 0.052528, 8.314554, 4, f64::NAN, 0.023134509624411187034),
    (2, 50, 0.264388, 0.068045, 0.167931, 7.417225, 1, 4.3245987337102218454, 0.93869201273325377688),
    (2, 50, 0.360213, 0.293928, 0.030364, 13.196945, 1, 3.7890193321143619742, 0.25668502834066825382),
    (2, 20000, 0.949637, 0.42348, 0.120743, 24.127088, 4, 1.1261062077019626051e+1, 0.02885202626031471471),
    (3, 1000, 0.492843, 0.021313, 0.276089, 25.682539, 1, 6.0236792538036273665, 0.28505680774487608555),
    (1, 20000, 0.08276, 0.242717, 0.019617, 15.68205, 4, f64::NAN, 0.0051297861924553031209),
    (2, 5000, 0.864766, 0.37706, 0.254971, 6.899625, 4, 5.0219025127250756618, 0.04106470179972965086),
    (2, 200, 0.84002, 0.402347, 0.147419, 32.952287, 2, 7.1889199564088631729, 0.23007761391833913075),
    (2, 50, 0.809425, 0.226171, 0.059139, 30.353422, 4, 7.5872636414336988774, 0.31922666272614385646),
    (3, 20000, 0.797887, 0.131493, 0.22774, 16.852635, 1, 5.6145882486005675148, 0.026195000102047363561),
    (1, 20000, 0.447491, 0.025202, 0.101022, 15.798894, 3, f64::NAN, 0.007983404049017647728),
    (2, 1000, 0.608166, 0.160193, 0.032352, 2.34416, 1, 3.3379602538226356109, 0.030913501650964614025),
    (2, 5000, 0.797515, 0.193064, 0.08462, 11.175447, 3, 6.1584075787779329537, 0.031457172704931286918),
    (2, 1000, 0.866636, 0.138616, 0.180346, 24.713682, 2, 9.5937126179154009977, 0.1472115368989110564),
    (3, 5000, 0.253391, 0.492072, 0.166144, 25.463476, 1, 4.1263600105807336906, 0.18375771516598170115),
    (1, 5000, 0.225571, 0.141045, 0.286106, 37.077917, 3, f64::NAN, 0.026159585406190575728),
    (2, 5000, 0.786591, 0.142279, 0.056135, 37.643648, 3, 8.2546257620148063561, 0.034819207905178284184),
    (2, 200, 0.328318, 0.470176, 0.241897, 39.889097, 2, 4.090135176234765709, 0.42902423098689132146),
    (2, 1000, 0.021397, 0.405028, 0.269193, 5.333742, 4, 3.5181549422386483779, 2.6713609128143828053),
    (3, 20000, 0.043509, 0.310652, 0.244239, 4.520158, 1, 4.5186621806695473, 1.7145164093403847779),
    (1, 20000, 0.922632, 0.132546, 0.101116, 39.106602, 4, f64::NAN, 0.0042230220211583002794),
    (2, 50, 0.756069, 0.025618, 0.080635, 21.213276, 4, 9.3637281795992427924, 0.49249607046282710358),
    (2, 5000, 0.915652, 0.178014, 0.107149, 22.145803, 2, 1.1053721281278017686e+1, 0.055338289450657028597),
    (2, 20000, 0.54709, 0.082719, 0.090874, 32.972319, 1, 6.2718770244258095251, 0.024198151570097493947),
    (3, 5000, 0.632179, 0.201937, 0.246278, 26.123382, 4, 4.8653865486542262264, 0.066941120070683368586),
    (1, 5000, 0.095842, 0.073228, 0.089306, 10.669646, 4, f64::NAN, 0.028235381686787793303),
    (2, 20000, 0.07364, 0.18478, 0.093441, 12.069256, 4, 3.9547395514926670178, 0.11494668707172202771),
    (2, 5000, 0.817772, 0.427998, 0.174693, 15.638568, 3, 5.4728312045092991321, 0.03917158789366049539),
    (2, 20000, 0.746229, 0.367275, 0.280821, 7.671747, 4, 4.1058320945853382126, 0.020415849985266472493),
    (3, 1000, 0.91707, 0.35021, 0.224834, 34.59327, 2, 6.6291966198811665054, 0.11153112408164378602),
    (1, 1000, 0.763635, 0.281243, 0.15878, 16.132797, 3, f64::NAN, 0.018048038505390572673),
    (2, 5000, 0.666609, 0.043815, 0.132044, 18.721646, 4, 7.3098112376075060833, 0.05580176470886205785),
    (2, 200, 0.193101, 0.410492, 0.133956, 17.016802, 4, 3.5830308632820717304, 0.47552212023661161694),
    (2, 1000, 0.669367, 0.476191, 0.18479, 35.872575, 2, 5.0845792367653019629, 0.10225123567986879682),
    (3, 5000, 0.419926, 0.107314, 0.258648, 21.61424, 4, 4.8534687612711793072, 0.12640683767004690339),
    (1, 5000, 0.732072, 0.340238, 0.265753, 28.973055, 3, f64::NAN, 0.0095729532826106108726),
    (2, 1000, 0.356994, 0.302819, 0.15606, 9.830107, 1, 3.5548553595005847221, 0.12318148331974663535),
    (2, 20000, 0.453073, 0.106892, 0.290556, 3.577443, 2, 3.7947494307854996997, 0.031612108148525107225),
    (2, 5000, 0.542469, 0.41856, 0.259173, 28.830219, 2, 4.4608900378771768338, 0.058626650034701092021),
    (3, 5000, 0.533793, 0.347286, 0.140666, 33.156925, 4, 4.432869556173188422, 0.059407752512249678239),
    (1, 5000, 0.81883, 0.074692, 0.038079, 23.52801, 4, f64::NAN, 0.0062824346643678641706),
    (2, 200, 0.905385, 0.264901, 0.026453, 26.853854, 3, 9.8792072859102773436, 0.12426530250210827551),
    (2, 5000, 0.189209, 0.29114, 0.276815, 38.46866, 2, 4.2654807919108832071, 0.16610190690961000224),
    (2, 200, 0.347246, 0.40021, 0.013145, 33.223955, 2, 4.1436930200120992361, 0.095797511971065663913),
    (3, 200, 0.699846, 0.403254, 0.235812, 11.764492, 4, 3.7091252073846883483, 0.21435994421480809697),
];
