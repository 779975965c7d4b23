#!/usr/bin/env python3
"""Regenerates the deterministic test fixtures under tests/data.

Every file is a pure function of the seeds below; rerunning the script
produces byte-identical output.
"""

import argparse
import csv
import io
import json
import random
from pathlib import Path

# --------------------------------------------------------------------------
# Vocabulary

TOPICS = {
    "History": {
        "nouns": ["조선", "고려", "삼국 시대", "훈민정음", "임진왜란", "실학", "향약", "과거 제도", "팔만대장경",
                  "측우기", "대동여지도", "규장각", "성균관", "동학 농민 운동", "갑오개혁", "신라", "백제"],
        "facts": ["{a} 시기의 사회 구조를 이해하는 데 중요한 단서를 제공한다",
                  "{a}의 성립 과정은 당시 정치 세력의 변화와 밀접한 관련이 있다",
                  "{a}에 관한 기록은 여러 사료에 남아 있어 비교 연구가 가능하다",
                  "학자들은 {a}가 이후 제도 발전에 큰 영향을 주었다고 평가한다",
                  "{a}의 의의는 백성의 삶을 개선하려는 노력에서 찾을 수 있다"],
    },
    "Biology": {
        "nouns": ["세포막", "광합성", "미토콘드리아", "유전자", "단백질", "효소", "생태계", "면역 체계", "엽록체",
                  "세포 분열", "신경 세포", "호르몬", "적응", "진화", "먹이 사슬", "염색체", "항체"],
        "facts": ["{a}는 생명 활동을 유지하는 데 필수적인 역할을 한다",
                  "{a}의 구조를 살펴보면 기능과의 관계를 쉽게 이해할 수 있다",
                  "실험 결과에 따르면 {a}는 온도와 환경의 영향을 받는다",
                  "{a}에 대한 연구는 질병 치료 방법 개발로 이어졌다",
                  "생물학 교과서는 {a}를 기본 개념으로 다룬다"],
    },
    "Physics": {
        "nouns": ["관성", "중력", "전자기 유도", "운동량", "에너지 보존 법칙", "파동", "굴절", "열역학", "전기 회로",
                  "마찰력", "원자 모형", "빛의 속도", "자기장", "진동", "저항"],
        "facts": ["{a}는 일상생활의 여러 현상을 설명하는 데 사용된다",
                  "{a}의 원리는 간단한 실험으로 확인할 수 있다",
                  "물리학자들은 {a}를 수식으로 정리하여 예측에 활용한다",
                  "{a}를 이해하면 기계 장치의 작동 방식을 설명할 수 있다",
                  "교실에서는 {a}를 측정하는 실험을 자주 진행한다"],
    },
    "Economics": {
        "nouns": ["수요와 공급", "기회비용", "물가 상승", "환율", "국내 총생산", "시장 실패", "세금", "금리", "무역 수지",
                  "경기 순환", "소비자 잉여", "독점", "공공재", "저축"],
        "facts": ["{a}는 가계와 기업의 의사 결정에 직접적인 영향을 준다",
                  "{a}의 변화는 통계 자료를 통해 확인할 수 있다",
                  "경제학 입문 과정에서는 {a}를 그래프로 설명한다",
                  "정부는 {a}를 고려하여 정책 방향을 결정한다",
                  "{a}에 대한 이해는 합리적인 소비 습관으로 이어진다"],
    },
    "Food": {
        "nouns": ["김치", "된장", "발효 식품", "나물", "비빔밥", "전통 장류", "식이 섬유", "단백질 식품", "제철 채소",
                  "곡물", "젓갈", "떡", "식품 보관법", "영양소"],
        "facts": ["{a}는 지역과 계절에 따라 다양한 방식으로 만들어진다",
                  "{a}에는 건강에 도움이 되는 성분이 많이 들어 있다",
                  "전문가들은 {a}를 균형 잡힌 식단의 일부로 권장한다",
                  "{a}의 조리법은 세대를 거쳐 전해 내려왔다",
                  "{a}를 올바르게 보관하면 맛과 영양을 오래 유지할 수 있다"],
    },
    "ComputerScience": {
        "nouns": ["알고리즘", "자료 구조", "운영 체제", "데이터베이스", "컴파일러", "네트워크 프로토콜", "정렬 방법",
                  "암호화", "메모리 관리", "검색 엔진", "병렬 처리", "프로그래밍 언어", "캐시"],
        "facts": ["{a}는 프로그램의 효율을 결정하는 중요한 요소이다",
                  "{a}의 동작 원리는 단계별 예제로 설명할 수 있다",
                  "개발자들은 {a}를 설계할 때 성능과 안정성을 함께 고려한다",
                  "{a}에 관한 기초 지식은 소프트웨어 교육의 핵심이다",
                  "대학 강의에서는 {a}를 구현하는 과제를 자주 낸다"],
    },
}

MORE_TOPICS = {
    "Chemistry": ["산화 환원 반응", "주기율표", "화학 결합", "촉매", "용해도", "산과 염기", "고분자", "분자 구조",
                  "전기 분해", "화학 평형", "유기 화합물", "결정 구조", "반응 속도"],
    "Mathematics": ["미분", "적분", "확률", "소수", "행렬", "함수의 극한", "기하학", "통계적 추정", "수열", "방정식",
                    "삼각 함수", "집합론", "그래프 이론"],
    "Law": ["헌법", "민법", "계약", "소유권", "형사 절차", "행정 심판", "손해 배상", "상속", "저작권", "근로 기준",
            "소송 절차", "기본권"],
    "Medicine": ["혈압", "당뇨병", "예방 접종", "수면 습관", "만성 질환", "재활 치료", "감염병", "영양 관리", "심장 건강",
                 "정신 건강", "건강 검진", "항생제"],
    "Agriculture": ["벼농사", "토양 관리", "스마트 농업", "비료", "병해충 방제", "온실 재배", "종자 개량", "축산",
                    "농업 용수", "유기 농업", "작물 순환"],
    "Sports": ["마라톤", "축구 전술", "근력 운동", "수영", "체력 훈련", "스포츠 과학", "태권도", "야구 기록", "올림픽",
               "부상 예방", "경기 분석"],
}
for _name, _nouns in MORE_TOPICS.items():
    TOPICS[_name] = {"nouns": _nouns, "facts": []}

# Slot templates shared by every topic. {a} and {b} are topic nouns; a
# particle written as {은}, {이}, {을}, {와} follows the preceding word.
TEMPLATES = [
    "{y}년에 발표된 한 연구에 따르면 {a}{은} {b}{와} 깊은 관련이 있다",
    "{a}에 관한 조사에서 응답자의 {n}퍼센트가 {b}의 중요성을 언급하였다",
    "{place} 지역에서는 {a}{와} 관련된 {adj} 사례가 보고되었다",
    "{a}{은} {b}{와} 비교할 때 {adj} 특징을 보인다",
    "{person} 교수는 {a}{을} 설명하면서 {b}의 역할을 강조하였다",
    "교과서에서는 {a}{을} {n}개의 단계로 나누어 소개한다",
    "{a}{을} 제대로 이해하려면 먼저 {b}에 대한 기초 지식이 필요하다",
    "최근 {y}년 자료를 보면 {a}의 영향이 {n}퍼센트가량 커졌다",
    "{a}{은} 오랫동안 {adj} 연구 주제로 여겨져 왔다",
    "많은 학생들이 {a}{와} {b}의 차이를 헷갈려 한다",
    "{place}의 한 연구소는 {a}{을} 주제로 {n}회의 공개 강연을 열었다",
    "{a}의 개념은 {y}년 무렵 처음 체계적으로 정리되었다",
    "{b}{이} 변하면 {a}에도 {adj} 변화가 나타난다",
    "{person} 연구원은 {a}{이} {b}보다 먼저 다루어져야 한다고 주장하였다",
    "{a}에 대한 오해 가운데 하나는 {b}{와} 같은 것이라고 생각하는 것이다",
    "실제 사례를 살펴보면 {a}{은} {place}에서 {adj} 방식으로 적용되었다",
    "{a}{을} 다룬 보고서는 모두 {n}쪽 분량으로 구성되어 있다",
    "{a}의 역사를 되짚어 보면 {b}{이} 중요한 전환점이었다",
    "전문가들은 {a}{와} {b}{을} 함께 살펴볼 것을 권한다",
    "{y}년 이후 {a}에 관한 논문은 해마다 {n}편 이상 발표되고 있다",
    "{a}{은} 일상생활에서도 {adj} 의미를 지닌다",
    "이 단원의 목표는 {a}의 원리를 {b}의 사례로 확인하는 것이다",
    "{place}의 학교들은 {a}{을} 주제로 한 {adj} 수업을 운영한다",
    "{a}{와} {b}의 관계는 아직 완전히 밝혀지지 않았다",
]
ADJS = ["뚜렷한", "흥미로운", "중요한", "독특한", "복잡한", "다양한", "의미 있는", "새로운", "일관된", "예상하지 못한",
        "실용적인", "체계적인", "뜻밖의", "점진적인"]
PERSONS = ["김민수", "이서연", "박지훈", "최유진", "정하늘", "강도윤", "윤서아", "한지민", "오준호", "임채원", "서지우",
           "장하은", "권태민", "송다인"]
REGIONS = ["서울", "부산", "대구", "광주", "대전", "전주", "강릉", "제주", "인천", "울산", "청주", "창원", "포항", "목포"]
PARTICLES = {"은": ("은", "는"), "이": ("이", "가"), "을": ("을", "를"), "와": ("과", "와")}

CONNECTIVES = ["또한", "그리고", "한편", "따라서", "특히", "예를 들어", "이와 함께", "결과적으로"]
CLOSERS = ["이러한 내용은 관련 분야를 공부하는 학생들에게 유익하다.",
           "자세한 내용은 참고 문헌을 통해 더 살펴볼 수 있다.",
           "이 주제는 앞으로도 꾸준히 연구될 필요가 있다.",
           "따라서 기본 개념을 정확히 이해하는 것이 중요하다."]

CHAT = ["오늘 {f} 먹었는데 진짜 맛있었어요 ㅋㅋ", "주말에 친구랑 {p} 다녀왔어요", "요즘 너무 피곤해서 아무것도 하기 싫네요",
        "혹시 {p} 가보신 분 계신가요?", "저는 {f} 별로던데 다들 좋아하시더라구요", "ㅎㅎ 다음에 또 가려구요",
        "날씨가 좋아서 기분이 좋네요", "어제 드라마 보다가 늦게 잤어요 ㅠㅠ", "다들 좋은 하루 보내세요~",
        "그냥 그랬어요 뭐 나쁘진 않았는데", "사진은 나중에 올릴게요", "아 진짜 배고프다"]
FOODS = ["떡볶이", "치킨", "마라탕", "짜장면", "삼겹살", "냉면", "피자", "김밥"]
PLACES = ["부산", "제주도", "강릉", "홍대", "성수동", "경주", "여수", "전주"]

SPAM = ["지금 바로 클릭하세요", "최저가 보장 {n}원", "무료 배송 이벤트 진행 중", "한정 수량 특가 세일",
        "회원 가입만 해도 적립금 {n}원 지급", "오늘만 이 가격", "대박 할인 놓치지 마세요", "구매 후기 이벤트 참여하고 선물 받기",
        "카톡 상담 환영 24시간 문의 가능", "{p} 최고 인기 상품 초특가", "1+1 행사 마감 임박", "쿠폰 다운로드 바로가기"]
PRODUCTS = ["다이어트 보조제", "명품 가방", "무선 이어폰", "화장품 세트", "홍삼 선물", "안마 의자", "캠핑 용품"]

TOXIC = {
    "sexual": ["노골적인 성인 영상 링크를 공유한다", "음란한 사진을 보내 달라고 요구한다", "성적인 농담으로 상대를 괴롭힌다"],
    "violations": ["불법 도박 사이트 주소를 알려준다", "마약을 몰래 판매하는 방법을 설명한다", "위조 신분증 제작을 광고한다"],
    "violence": ["상대를 때려 눕히겠다고 협박한다", "흉기로 공격하겠다고 위협한다", "잔인하게 폭행한 장면을 자랑한다"],
    "bias_discrimination": ["특정 지역 출신은 모두 게으르다고 비하한다", "여성은 일을 못 한다며 차별한다", "외국인 노동자를 혐오하는 글을 올린다"],
    "politics": ["특정 정당 지지자는 모두 매국노라고 선동한다", "선거가 조작되었다는 근거 없는 주장을 퍼뜨린다", "정치인을 향한 음모론을 확산한다"],
    "disasters": ["참사 희생자를 조롱하는 글을 쓴다", "재난 피해 지역을 비웃는 농담을 한다", "사고 유가족을 모욕하는 댓글을 단다"],
    "profanity": ["씨발 존나 짜증나네 개새끼들", "병신 같은 소리 하지 마라 미친놈아", "좆같은 세상 다 꺼져라 썅"],
}

HASHTAGS = ["#맛집", "#여행", "#일상", "#데일리", "#좋아요", "#팔로우", "#소통", "#카페", "#먹스타그램", "#셀카",
            "#오오티디", "#주말", "#힐링", "#감성", "#인스타"]


def has_batchim(word):
    ch = word[-1]
    if "가" <= ch <= "힣":
        return (ord(ch) - 0xAC00) % 28 != 0
    return False


def josa(word, pair):
    a, b = pair
    return word + (a if has_batchim(word) else b)


# --------------------------------------------------------------------------
# Document generators


def render_template(rng, topic, template):
    nouns = TOPICS[topic]["nouns"]
    a, b = rng.sample(nouns, 2)
    slots = {"a": a, "b": b, "y": str(rng.randint(1890, 2023)), "n": str(rng.randint(2, 97)), "adj": rng.choice(ADJS),
             "person": rng.choice(PERSONS), "place": rng.choice(REGIONS)}
    out = ""
    i = 0
    while i < len(template):
        if template[i] == "{":
            j = template.index("}", i)
            key = template[i + 1:j]
            out += josa(out, PARTICLES[key])[len(out):] if key in PARTICLES else slots[key]
            i = j + 1
        else:
            out += template[i]
            i += 1
    return out


def good_sentence(rng, topic):
    bank = TOPICS[topic]
    if bank["facts"] and rng.random() < 0.3:
        noun = rng.choice(bank["nouns"])
        fact = rng.choice(bank["facts"])
        s = fact.replace("{a}는", josa(noun, ("은", "는"))).replace("{a}가", josa(noun, ("이", "가")))
        s = s.replace("{a}를", josa(noun, ("을", "를"))).replace("{a}의", noun + "의").replace("{a}에", noun + "에")
        s = s.replace("{a}", noun)
    else:
        s = render_template(rng, topic, rng.choice(TEMPLATES))
    s += "."
    if rng.random() < 0.35:
        s = rng.choice(CONNECTIVES) + " " + s
    return s


def good_text(rng, topic=None):
    topic = topic or rng.choice(sorted(TOPICS))
    paras = []
    for _ in range(rng.randint(3, 5)):
        paras.append(" ".join(good_sentence(rng, topic) for _ in range(rng.randint(3, 5))))
    paras[-1] += " " + rng.choice(CLOSERS)
    return topic, "\n\n".join(paras)


def chat_text(rng):
    lines = []
    for _ in range(rng.randint(4, 8)):
        lines.append(rng.choice(CHAT).replace("{f}", rng.choice(FOODS)).replace("{p}", rng.choice(PLACES)))
    return " ".join(lines)


def spam_text(rng):
    lines = []
    for _ in range(rng.randint(5, 9)):
        lines.append(rng.choice(SPAM).replace("{n}", str(rng.randint(1, 99) * 1000)).replace("{p}", rng.choice(PRODUCTS)))
    return " ".join(lines)


def toxic_text(rng, category):
    _, base = good_text(rng)
    paras = base.split("\n\n")
    bad = " ".join("어떤 사람은 " + s + "." if not s.endswith("놈아") else s for s in rng.sample(TOXIC[category], 2))
    paras.insert(rng.randint(0, len(paras)), bad + " " + rng.choice(TOXIC[category]) + ".")
    return "\n\n".join(paras)


def hashtag_text(rng):
    words = []
    for _ in range(rng.randint(12, 30)):
        words.append(rng.choice(HASHTAGS) if rng.random() < 0.6 else rng.choice(["오늘", "너무", "좋다", "사진", "최고"]))
    return " ".join(words)


def ellipsis_text(rng):
    _, base = good_text(rng)
    sents = base.replace("\n\n", " ").split(". ")
    return "...... ".join(sents[: rng.randint(3, 6)]) + "........"


def punct_text(rng):
    chunks = []
    for _ in range(rng.randint(8, 20)):
        chunks.append(rng.choice(["!!!", "★★★", "###", "@@", "^^;", "~~~", "ㅋㅋ", "???", ">>>", "***", "♥♥"]) +
                      rng.choice(["", "대박", "헐", "", "와"]))
    return " ".join(chunks)


def gibberish_text(rng):
    words = []
    for _ in range(rng.randint(40, 90)):
        words.append("".join(chr(rng.randint(0xAC00, 0xD7A3)) for _ in range(rng.randint(1, 4))))
    return " ".join(words)


def code_text(rng):
    alphabet = "abcdefghijklmnopqrstuvwxyz0123456789=&?%/_-"
    return " ".join("".join(rng.choice(alphabet) for _ in range(rng.randint(6, 24))) for _ in range(rng.randint(20, 40)))


def fffd_text(rng):
    _, base = good_text(rng)
    chars = list(base)
    for i in range(len(chars)):
        if chars[i] not in " \n" and rng.random() < 0.015:
            chars[i] = "�"
    return "".join(chars)


def jamo_text(rng):
    _, base = good_text(rng)
    # Decompose a few syllables into conjoining jamo, then drop in runs of
    # leading consonants that cannot compose.
    out = []
    for ch in base:
        if "가" <= ch <= "힣" and rng.random() < 0.03:
            s = ord(ch) - 0xAC00
            lead, vowel, tail = s // 588, (s % 588) // 28, s % 28
            out.append(chr(0x1100 + lead) + chr(0x1161 + vowel) + (chr(0x11A7 + tail) if tail else chr(0x11A8)))
        else:
            out.append(ch)
    text = "".join(out)
    for _ in range(rng.randint(1, 3)):
        pos = text.rfind(" ", 0, rng.randint(1, len(text) - 1)) + 1
        text = text[:pos] + "".join(chr(0x1100 + rng.randint(0, 18)) for _ in range(rng.randint(3, 5))) + text[pos:]
    return text


def cp1252_mojibake(s):
    out = []
    for b in s.encode("utf-8"):
        try:
            out.append(bytes([b]).decode("cp1252"))
        except UnicodeDecodeError:
            out.append(chr(b))
    return "".join(out)


def partial_mojibake(rng):
    _, text = good_text(rng)
    paras = text.split("\n\n")
    k = rng.randrange(len(paras))
    words = paras[k].split(" ")
    j = rng.randrange(len(words))
    words[j] = cp1252_mojibake(words[j])
    paras[k] = " ".join(words)
    return "\n\n".join(paras)


BOILERPLATE = ["무단 전재 및 재배포 금지", "이 글은 자료 공유를 위해 작성되었습니다", "본문 내용은 수정될 수 있습니다"]


def repeated_lines(rng):
    _, text = good_text(rng)
    line = rng.choice(BOILERPLATE)
    paras = text.split("\n\n")
    out = []
    for p in paras:
        out.append(p)
        out.append(line)
    return "\n\n".join(out)


def near_dup(rng, text):
    words = text.split(" ")
    i = rng.randrange(len(words))
    words[i] = words[i] + "도"
    return " ".join(words)


def phone(rng):
    return rng.choice(["010", "011", "016"]) + "-" + str(rng.randint(1000, 9999)) + "-" + str(rng.randint(1000, 9999))


def rrn(rng):
    return "%02d%02d%02d-%d%06d" % (rng.randint(50, 99), rng.randint(1, 12), rng.randint(1, 28), rng.randint(1, 4),
                                    rng.randint(0, 999999))


def email(rng):
    user = "".join(rng.choice("abcdefghijklmnopqrstuvwxyz") for _ in range(rng.randint(4, 9)))
    return user + str(rng.randint(1, 99)) + "@" + rng.choice(["example.com", "mail.co.kr", "test.org"])


def decorate_good(rng, text):
    """Adds the recoverable defects good documents may carry."""
    r = rng.random()
    if r < 0.12:
        text += "\n\n문의: " + phone(rng) + " 또는 " + email(rng)
    elif r < 0.18:
        text = text.replace("은 ", "은 ＡＢＣ ", 1)
    elif r < 0.22:
        text = text.replace(".", ".​", 2)
    elif r < 0.32:
        text += "\n\n" + rng.choice(BOILERPLATE)
    return text


def doc(i, text, kind, source_name="cc"):
    return {"id": "cc-%04d" % i, "text": text, "source_name": source_name, "fixture_kind": kind}


def build_cc_fixture(seed):
    rng = random.Random(seed)
    plan = ([("good", 130), ("exact_dup", 60), ("near_dup", 60), ("hashtag", 70), ("ellipsis", 50), ("punct", 50),
             ("gibberish", 80), ("code", 40), ("fffd", 50), ("jamo", 30), ("spam", 130), ("chat", 110), ("toxic", 80),
             ("mojibake", 40), ("partial_mojibake", 20), ("repeated_lines", 20)])
    kinds = [k for k, n in plan for _ in range(n)]
    rng.shuffle(kinds)
    # Duplicates need an earlier good document to copy; good ones go first
    # within the shuffled order by pre-generating a pool.
    pool = [good_text(rng)[1] for _ in range(40)]
    docs = []
    for i, kind in enumerate(kinds):
        if kind == "good":
            text = decorate_good(rng, good_text(rng)[1])
            pool.append(text)
        elif kind == "exact_dup":
            text = rng.choice(pool)
        elif kind == "near_dup":
            text = near_dup(rng, rng.choice(pool))
        elif kind == "hashtag":
            text = hashtag_text(rng)
        elif kind == "ellipsis":
            text = ellipsis_text(rng)
        elif kind == "punct":
            text = punct_text(rng)
        elif kind == "gibberish":
            text = gibberish_text(rng)
        elif kind == "code":
            text = code_text(rng)
        elif kind == "fffd":
            text = fffd_text(rng)
        elif kind == "jamo":
            text = jamo_text(rng)
        elif kind == "spam":
            text = spam_text(rng)
        elif kind == "chat":
            text = chat_text(rng)
        elif kind == "toxic":
            text = toxic_text(rng, rng.choice(sorted(TOXIC)))
        elif kind == "partial_mojibake":
            text = partial_mojibake(rng)
        elif kind == "repeated_lines":
            text = repeated_lines(rng)
        elif kind == "mojibake":
            text = cp1252_mojibake(good_text(rng)[1])
        docs.append(doc(i, text, kind))
    # The 40 seed pool texts also appear as documents so duplicates have
    # originals in the corpus.
    for j, text in enumerate(pool[:40]):
        docs.insert(j * 25, {"id": "cc-seed-%02d" % j, "text": text, "source_name": "cc", "fixture_kind": "good"})
    return docs


def labeled(text, label):
    return {"text": text, "label": label}


def build_training(seed):
    rng = random.Random(seed)
    general, educational, toxicity, domain = [], [], [], []
    for _ in range(300):
        topic, text = good_text(rng)
        general.append(labeled(text, "1"))
        educational.append(labeled(text, "1"))
        toxicity.append(labeled(text, "clean"))
        domain.append(labeled(text, topic))
    for _ in range(150):
        text = chat_text(rng)
        general.append(labeled(text, "1"))
        educational.append(labeled(text, "0"))
        toxicity.append(labeled(text, "clean"))
    for _ in range(200):
        text = spam_text(rng)
        general.append(labeled(text, "0"))
        educational.append(labeled(text, "0"))
        toxicity.append(labeled(text, "clean"))
    for _ in range(100):
        for text in (gibberish_text(rng), code_text(rng), hashtag_text(rng)):
            general.append(labeled(text, "0"))
            educational.append(labeled(text, "0"))
    for cat in sorted(TOXIC):
        for _ in range(120):
            toxicity.append(labeled(toxic_text(rng, cat), cat))
    for rows in (general, educational, toxicity, domain):
        rng.shuffle(rows)
    return general, educational, toxicity, domain


def web_sample(rng):
    """One document of ordinary web prose: mostly informative, some chat,
    ads and hostile posts."""
    r = rng.random()
    if r < 0.6:
        return decorate_good(rng, good_text(rng)[1])
    if r < 0.75:
        return chat_text(rng)
    if r < 0.9:
        return spam_text(rng)
    return toxic_text(rng, rng.choice(sorted(TOXIC)))


def build_lm_corpus(seed, n, prefix):
    rng = random.Random(seed)
    return [{"id": "%s-%04d" % (prefix, i), "text": web_sample(rng), "source_name": "reference"} for i in range(n)]


def build_stats_fixture(seed):
    """Small tagged corpus plus its expected `stats --axis source` CSV."""
    rng = random.Random(seed)
    docs = []
    for i in range(60):
        r = rng.random()
        tags = {"language": "Korean"}
        if r < 0.6:
            tags["source"] = "Organic"
            tags["subsource"] = rng.choice(["Web", "News", "Book"])
        elif r < 0.9:
            tags["source"] = "Synthetic"
        text = " ".join(rng.choice(["가나", "다라", "마바", "사아", "자차"]) for _ in range(rng.randint(1, 30)))
        docs.append({"id": "st-%02d" % i, "text": text, "source_name": "web", "tags": tags})
    rows = {}
    total = 0
    for d in docs:
        label = d["tags"].get("source", "unknown")
        n = len(d["text"].split())
        r = rows.setdefault(label, [0, 0])
        r[0] += 1
        r[1] += n
        total += n
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["axis", "label", "docs", "tokens", "share"])
    for label in sorted(k for k in rows if k != "unknown") + (["unknown"] if "unknown" in rows else []):
        docs_n, tok = rows[label]
        w.writerow(["source", label, docs_n, tok, "%.6f" % (tok / total)])
    return docs, out.getvalue()


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "tests" / "data"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    write_jsonl(out / "cc_fixture.jsonl", build_cc_fixture(20240101))
    general, educational, toxicity, domain = build_training(777)
    write_jsonl(out / "quality_general.jsonl", general)
    write_jsonl(out / "quality_educational.jsonl", educational)
    write_jsonl(out / "toxicity.jsonl", toxicity)
    write_jsonl(out / "domain.jsonl", domain)
    write_jsonl(out / "lm_reference.jsonl", build_lm_corpus(4242, 500, "ref"))
    write_jsonl(out / "lm_calibration.jsonl", build_lm_corpus(9191, 300, "cal"))
    stats_docs, stats_csv = build_stats_fixture(31337)
    write_jsonl(out / "stats_fixture.jsonl", stats_docs)
    (out / "stats_fixture_source.csv").write_text(stats_csv, encoding="utf-8")

    config = {
        "seed": 7,
        "workers": 1,
        "batch_size": 256,
        "stages": ["dedup", "heuristic", "perplexity", "broken_fix", "quality", "toxicity", "line_dedup", "final_refine"],
        "web_sources": ["cc", "web"],
        "dedup": {"tau": 0.85, "ngram": 3},
        "perplexity": {"train": "lm_reference.jsonl", "order": 5, "floor": 0.01,
                       "calibration": "lm_calibration.jsonl", "q_low": 0.01, "q_high": 0.99},
        "quality": {"general": {"train": "quality_general.jsonl", "bits": 18},
                    "educational": {"train": "quality_educational.jsonl", "bits": 18},
                    "threshold_general": 0.5, "threshold_educational": 0.5, "combine": "both"},
        "toxicity": {"train": "toxicity.jsonl", "bits": 18, "threshold": 0.5},
        "tagging": {"domain": {"train": "domain.jsonl", "bits": 18}},
    }
    (out / "pipeline.json").write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
