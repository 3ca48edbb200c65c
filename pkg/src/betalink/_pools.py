"""Bundled value pools for the synthetic data generator.

Names are sampled with a heavy-tailed rank weighting so that popular names
collide between unrelated records the way real files do.  Age bracket and
occupation are drawn jointly from an 8x8 table whose rows skew the way one
would expect (students young, retirees old).
"""

from __future__ import annotations

import numpy as np

GIVEN_NAMES = (
    "JAMES", "MARIA", "JOHN", "ANA", "ROBERT", "CARMEN", "MICHAEL", "ROSA",
    "WILLIAM", "LUCIA", "DAVID", "ELENA", "JOSE", "SOFIA", "CARLOS", "ISABEL",
    "RICHARD", "JUANA", "JOSEPH", "TERESA", "THOMAS", "MARTA", "DANIEL", "GLORIA",
    "LUIS", "SANDRA", "MARCOS", "PATRICIA", "PAUL", "LAURA", "MARK", "JULIA",
    "JORGE", "SUSAN", "KEVIN", "SILVIA", "BRIAN", "ANDREA", "PETER", "PAULA",
    "PEDRO", "MONICA", "ANTHONY", "LINDA", "KENNETH", "CLARA", "STEVEN", "ALICIA",
    "ANDREW", "EMILIA", "RAUL", "BARBARA", "JOSHUA", "IRENE", "GEORGE", "VERONICA",
    "EDWARD", "NANCY", "OSCAR", "DIANA", "MIGUEL", "ADRIANA", "DONALD", "BEATRIZ",
    "RYAN", "CECILIA", "TIMOTHY", "MARGARITA", "JASON", "VICTORIA", "LARRY", "NORMA",
    "FRANK", "DOLORES", "SCOTT", "ESTHER", "ERIC", "ALMA", "STEPHEN", "LETICIA",
    "JACOB", "KAREN", "RAYMOND", "RUTH", "PATRICK", "YOLANDA", "SERGIO", "EVA",
    "DENNIS", "CRISTINA", "JERRY", "MERCEDES", "ALEJANDRO", "CATALINA", "HENRY", "INES",
    "WALTER", "CAROLINA", "ARTHUR", "JOSEFINA", "MANUEL", "AMPARO", "ALBERT", "CELIA",
    "FELIX", "VIOLETA", "ROGER", "RAMONA", "RUBEN", "AURORA", "ALAN", "MIRIAM",
    "JUAN", "CANDIDA", "VICTOR", "DELIA", "HECTOR", "FLOR", "RAMON", "GRACIELA",
    "EDUARDO", "NOEMI", "FERNANDO", "AMALIA", "ARMANDO", "LOURDES", "ALFREDO", "ELSA",
    "GERARDO", "HILDA", "ERNESTO", "OLGA", "RODRIGO", "MAGDA", "GUSTAVO", "LIDIA",
    "HUGO", "ZOILA", "IGNACIO", "PERLA", "ISMAEL", "NELLY", "JULIO", "SONIA",
    "LORENZO", "TANIA", "MARIO", "VILMA", "NESTOR", "WANDA", "OMAR", "XIOMARA",
    "PABLO", "YESENIA", "RAFAEL", "ZULMA", "SALVADOR", "BRENDA", "TOMAS", "DAISY",
    "ABRAHAM", "ABIGAIL", "ADOLFO", "ADELAIDA", "AGUSTIN", "AGATHA", "ALBERTO", "ALEJANDRA",
    "ALFONSO", "ALTAGRACIA", "AMBROSE", "ANASTASIA", "ANDRES", "ANGELICA", "ANSELMO", "ANTONIA",
    "ARISTIDES", "ASUNCION", "AUGUSTO", "AZUCENA", "BALTAZAR", "BENEDICTA", "BENJAMIN", "BERNADETTE",
    "BERNARDO", "BIBIANA", "BONIFACIO", "BRIGIDA", "CALVIN", "CARIDAD", "CASIMIRO", "CASSANDRA",
    "CAYETANO", "CELESTINA", "CLEMENTE", "CONCEPCION", "CONRADO", "CONSUELO", "CORNELIO", "CRISTOBAL",
    "DAMIAN", "DANIELA", "DELFINO", "DEMETRIA", "DESMOND", "DOMINGA", "DOMINGO", "DOROTEA",
    "EMILIANO", "EMMANUELA", "EPIFANIO", "ERNESTINA", "ESTANISLAO", "ESPERANZA", "EUGENIO", "EULALIA",
    "EUSEBIO", "EVANGELINA", "EZEQUIEL", "FABIOLA", "FAUSTINO", "FELICIANA", "FEDERICO", "FILOMENA",
    "FLORENCIO", "FORTUNATA", "FRANCISCO", "FREDESVINDA", "GABRIEL", "GENOVEVA", "GERVASIO", "GUADALUPE",
    "GREGORIO", "GRISELDA", "GUILLERMO", "HERMINIA", "HERIBERTO", "HIPOLITA", "HORACIO", "HORTENSIA",
    "HUMBERTO", "IGNACIA", "INDALECIO", "INOCENCIA", "ISIDORO", "ISADORA", "JACINTO", "JACQUELINE",
    "JEREMIAS", "JERONIMA", "JOAQUIN", "JOSEFA", "JULIAN", "JULIANA", "LADISLAO", "LEOCADIA",
    "LEONARDO", "LEONOR", "LEOPOLDO", "LIBRADA", "LISANDRO", "LORENZA", "LUCIANO", "LUDIVINA",
    "MACARIO", "MACRINA", "MARCELINO", "MARCELA", "MARGARITO", "MARIBEL", "MARTINIANO", "MATILDE",
    "MAXIMILIANO", "MAXIMINA", "MELCHOR", "MERCEDITA", "MODESTO", "MILAGROS", "NAPOLEON", "NATIVIDAD",
    "NICANOR", "NICOLASA", "NORBERTO", "OBDULIA", "OCTAVIO", "ODALYS", "PANFILO", "PASCUALA",
    "PATRICIO", "PETRONILA", "PORFIRIO", "PRIMITIVA", "PRUDENCIO", "PURIFICACION", "REMIGIO", "REFUGIA",
    "REYNALDO", "RICARDA", "ROGELIO", "ROSALINDA", "ROSENDO", "RUFINA", "SANTIAGO", "SATURNINA",
    "SEBASTIAN", "SEGUNDA", "SERAPIO", "SILVERIA", "SILVESTRE", "SIMONA", "TEODORO", "TEOFILA",
    "TIBURCIO", "TOMASA", "TRANQUILINO", "TRINIDAD", "VALENTIN", "VALERIANA", "VENANCIO", "VICENTA",
    "VIRGILIO", "VIRGINIA", "WENCESLAO", "WILFREDO", "ZACARIAS", "ZENAIDA", "ZENON", "ZULEMA",
)

FAMILY_NAMES = (
    "SMITH", "GARCIA", "JOHNSON", "MARTINEZ", "WILLIAMS", "RODRIGUEZ", "BROWN", "LOPEZ",
    "JONES", "GONZALEZ", "MILLER", "HERNANDEZ", "DAVIS", "PEREZ", "WILSON", "SANCHEZ",
    "ANDERSON", "RAMIREZ", "TAYLOR", "TORRES", "MOORE", "FLORES", "THOMAS", "RIVERA",
    "JACKSON", "GOMEZ", "WHITE", "DIAZ", "HARRIS", "REYES", "MARTIN", "MORALES",
    "THOMPSON", "CRUZ", "ROBINSON", "ORTIZ", "CLARK", "GUTIERREZ", "LEWIS", "CHAVEZ",
    "LEE", "RAMOS", "WALKER", "RUIZ", "HALL", "MENDOZA", "ALLEN", "VARGAS",
    "YOUNG", "CASTILLO", "KING", "JIMENEZ", "WRIGHT", "ROMERO", "SCOTT", "HERRERA",
    "GREEN", "MEDINA", "BAKER", "AGUILAR", "ADAMS", "GARZA", "NELSON", "CASTRO",
    "HILL", "VASQUEZ", "CAMPBELL", "FERNANDEZ", "MITCHELL", "GUZMAN", "ROBERTS", "MUNOZ",
    "CARTER", "SALAZAR", "PHILLIPS", "SOTO", "EVANS", "ALVARADO", "TURNER", "DELGADO",
    "PARKER", "PENA", "COLLINS", "CONTRERAS", "EDWARDS", "SANDOVAL", "STEWART", "JUAREZ",
    "MORRIS", "MALDONADO", "MURPHY", "ESPINOZA", "COOK", "ACOSTA", "ROGERS", "ESCOBAR",
    "MORGAN", "FIGUEROA", "PETERSON", "AVILA", "COOPER", "MOLINA", "REED", "AYALA",
    "BAILEY", "CAMPOS", "BELL", "VEGA", "GRAY", "FUENTES", "KELLY", "CARRILLO",
    "HOWARD", "CABRERA", "WARD", "MIRANDA", "COX", "SERRANO", "RICHARDSON", "ROSALES",
    "WOOD", "VALDEZ", "WATSON", "ORTEGA", "BROOKS", "DOMINGUEZ", "BENNETT", "SANTOS",
    "BARNES", "PACHECO", "ROSS", "CORDOVA", "HENDERSON", "IBARRA", "COLEMAN", "LUNA",
    "JENKINS", "NAVARRO", "PERRY", "SOLIS", "POWELL", "TREJO", "LONG", "CERVANTES",
    "PATTERSON", "SALINAS", "HUGHES", "ZAMORA", "FREEMAN", "VILLARREAL", "WASHINGTON", "MEZA",
    "BUTLER", "QUINTERO", "SIMMONS", "BARRERA", "FOSTER", "ROSARIO", "GONZALES", "MONTES",
    "BRYANT", "PONCE", "ALEXANDER", "LARA", "RUSSELL", "CISNEROS", "GRIFFIN", "BONILLA",
    "DEAN", "MEJIA", "HAYES", "DUARTE", "MYERS", "OCHOA", "FORD", "ROJAS",
    "HAMILTON", "PAREDES", "GRAHAM", "VALENCIA", "SULLIVAN", "MACIAS", "WALLACE", "OSORIO",
    "ABERNATHY", "ACEVEDO", "ALBRECHT", "ALMANZA", "ANDRADE", "APARICIO", "ARAGON", "ARANDA",
    "ARELLANO", "ARGUETA", "ARMENDARIZ", "ARMSTRONG", "ARREDONDO", "ARRIAGA", "ASHFORD", "ATKINSON",
    "BALDERAS", "BALLESTEROS", "BANUELOS", "BARAJAS", "BARRAGAN", "BARRIENTOS", "BAUTISTA", "BECERRA",
    "BELTRAN", "BENAVIDES", "BERMUDEZ", "BETANCOURT", "BLACKBURN", "BLANKENSHIP", "BOHANNON", "BRADSHAW",
    "BRIGHTWELL", "BRUMFIELD", "BUENROSTRO", "BUSTAMANTE", "BUSTOS", "CABALLERO", "CALDERON", "CAMACHO",
    "CANALES", "CARBAJAL", "CARDENAS", "CARMONA", "CARRANZA", "CARRASCO", "CASAREZ", "CASTANEDA",
    "CASTELLANOS", "CAUDILLO", "CAVAZOS", "CELAYA", "CHAMBERLAIN", "CHAPARRO", "CHAVARRIA", "CHRISTIANSEN",
    "CONCEPCION", "CORNEJO", "CORONADO", "COVARRUBIAS", "CRAWFORD", "CUMMINGS", "DAVENPORT", "DELACRUZ",
    "DELAGARZA", "DELAROSA", "DELATORRE", "DELEON", "DELVALLE", "DICKERSON", "DONALDSON", "DONOVAN",
    "ECHEVERRIA", "ELIZONDO", "ENRIQUEZ", "ESCAMILLA", "ESCALANTE", "ESPARZA", "ESQUIVEL", "ESTRADA",
    "FAIRBANKS", "FARNSWORTH", "FELICIANO", "FERGUSON", "FITZGERALD", "FITZPATRICK", "FLEMING", "FONSECA",
    "FRANKLIN", "FREDERICK", "FUENTEVILLA", "GALARZA", "GALINDO", "GALLAGHER", "GALLEGOS", "GAMBOA",
    "GARIBALDI", "GARRISON", "GODINEZ", "GOLDSMITH", "GONCALVES", "GRANADOS", "GREENWOOD", "GRIMALDO",
    "GUAJARDO", "GUERRERO", "HARRINGTON", "HENDRICKS", "HERNANDO", "HIDALGO", "HIGGINBOTHAM", "HOLLOWAY",
    "HUTCHINSON", "INFANTE", "IRIZARRY", "JARAMILLO", "JEFFERSON", "JIMENEZ-RIOS", "JOHNSTON", "KILPATRICK",
    "KIRKLAND", "LANGFORD", "LANDEROS", "LEDESMA", "LICONA", "LINDQUIST", "LIVINGSTON", "LONGORIA",
    "LOVELACE", "LOZANO", "MAGALLANES", "MALDONADO-RUIZ", "MANRIQUEZ", "MARQUEZ", "MARROQUIN", "MASCARENAS",
    "MATTHEWS", "MAYORGA", "MCALLISTER", "MCCULLOUGH", "MCDERMOTT", "MCFARLAND", "MCINTYRE", "MCKENZIE",
    "MELENDEZ", "MENCHACA", "MIDDLETON", "MONDRAGON", "MONTALVO", "MONTEMAYOR", "MONTENEGRO", "MONTGOMERY",
    "MORGENSTERN", "NAJERA", "NEGRETE", "NEWCOMB", "NIEVES", "NORIEGA", "OCAMPO", "OCONNELL",
    "OLIVARES", "OLVERA", "ONTIVEROS", "ORELLANA", "ORNELAS", "OROPEZA", "OROZCO", "OSBORNE",
    "PALACIOS", "PALOMINO", "PANTOJA", "PARTIDA", "PATTERSON-COLE", "PEDERSEN", "PENNINGTON", "PERALTA",
    "PETTIGREW", "PIMENTEL", "PINEDA", "PLASCENCIA", "PORTILLO", "PRENTICE", "PROVENCIO", "QUEZADA",
    "QUINTANILLA", "RADCLIFFE", "RASMUSSEN", "REGALADO", "RENTERIA", "RESENDEZ", "REYNOSO", "RICHMOND",
    "RIVADENEIRA", "ROBLEDO", "ROCKWELL", "RODARTE", "RONQUILLO", "ROSENBERG", "RUTHERFORD", "SALDIVAR",
    "SAMANIEGO", "SANTACRUZ", "SANTAMARIA", "SARMIENTO", "SAUCEDO", "SCHNEIDER", "SEPULVEDA", "SIFUENTES",
    "SINGLETON", "SOLORZANO", "SOTELO", "STAFFORD", "STANTON", "STEINBERG", "STEVENSON", "SUTHERLAND",
    "TALAMANTES", "TAPIA", "TELLEZ", "TERRAZAS", "THORNTON", "TIJERINA", "TOLEDO", "TOVAR",
    "TREVINO", "TRUJILLO", "URBINA", "URRUTIA", "VALDIVIA", "VALENZUELA", "VALLADARES", "VANDERPOOL",
    "VELASQUEZ", "VERDUZCO", "VILLAGOMEZ", "VILLALOBOS", "VILLANUEVA", "VILLASENOR", "VILLEGAS", "WHITFIELD",
    "WINCHESTER", "WOODRUFF", "YBARRA", "ZAVALA", "ZEPEDA", "ZIMMERMAN", "ZUNIGA", "ZURITA",
)

AGE_BRACKETS = ("0-14", "15-24", "25-34", "35-44", "45-54", "55-64", "65-74", "75+")

OCCUPATIONS = (
    "student", "clerk", "trades", "service", "professional", "manager", "laborer", "retired",
)

# Joint weights for (age bracket, occupation); rows are age brackets in the
# order above.  Integer weights are normalized at sampling time.
AGE_OCCUPATION_WEIGHTS = np.array(
    [
        # student clerk trades service prof manager laborer retired
        [60, 1, 1, 2, 1, 1, 2, 1],   # 0-14
        [40, 10, 8, 12, 4, 1, 9, 1],  # 15-24
        [8, 16, 14, 14, 16, 6, 12, 1],  # 25-34
        [2, 15, 15, 13, 18, 11, 12, 1],  # 35-44
        [1, 14, 14, 12, 16, 14, 11, 2],  # 45-54
        [1, 11, 11, 10, 12, 12, 8, 9],  # 55-64
        [1, 3, 3, 4, 4, 4, 3, 40],   # 65-74
        [1, 1, 1, 1, 1, 1, 1, 55],   # 75+
    ],
    dtype=np.float64,
)

# Neighboring keys on a QWERTY layout, used for typing errors.  Lookup is
# case-insensitive; replacements preserve the upper case used by names.
KEYBOARD_NEIGHBORS = {
    "q": "wa", "w": "qes", "e": "wrd", "r": "etf", "t": "ryg", "y": "tuh",
    "u": "yij", "i": "uok", "o": "ipl", "p": "ol",
    "a": "qsz", "s": "awdx", "d": "sefc", "f": "drgv", "g": "fthb",
    "h": "gyjn", "j": "hukm", "k": "jil", "l": "kop",
    "z": "asx", "x": "zsdc", "c": "xdfv", "v": "cfgb", "b": "vghn",
    "n": "bhjm", "m": "njk",
    "0": "9", "1": "2", "2": "13", "3": "24", "4": "35",
    "5": "46", "6": "57", "7": "68", "8": "79", "9": "80",
    "-": "0",
}

# Character shapes optical recognition confuses; applied in either listed
# direction, one occurrence at a time.
OCR_CONFUSIONS = (
    ("O", "0"), ("0", "O"), ("I", "1"), ("1", "I"), ("L", "1"), ("S", "5"),
    ("5", "S"), ("Z", "2"), ("2", "Z"), ("B", "8"), ("8", "B"), ("G", "6"),
    ("6", "G"), ("D", "O"), ("Q", "O"), ("C", "G"), ("U", "V"), ("V", "U"),
    ("M", "RN"), ("RN", "M"), ("W", "VV"), ("E", "F"),
)

# Common sound-alike substitutions for name strings.
PHONETIC_RULES = (
    ("PH", "F"), ("GH", "G"), ("KN", "N"), ("WR", "R"), ("MB", "M"),
    ("CK", "K"), ("LL", "L"), ("NN", "N"), ("SS", "S"), ("TT", "T"),
    ("RR", "R"), ("TH", "T"), ("CH", "SH"), ("SH", "CH"), ("EE", "I"),
    ("OO", "U"), ("AY", "AI"), ("EY", "Y"), ("OU", "OW"), ("CE", "SE"),
    ("CI", "SI"), ("Z", "S"),
)
