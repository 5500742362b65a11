"""Synthetic catalogs and labeled topic sets for tests and experiments.

Real channel data is proprietary, so the demo catalog and evaluation sets
are generated here at desk scale: Chinese-flavoured product titles grouped
by usage scene, human topic pairs, OCR side text, and a labeled topic set
shaped like a 65-title / 18-group evaluation layout.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .catalog import (LabeledPair, PairOrigin, Product, ProfileFeatures,
                      TopicSource, TopicTitle, write_catalog, write_topics)

_SCENES = [
    dict(name="露营", cats=("帐篷", "睡袋", "折叠桌", "营地灯"), adjs=("户外", "防风", "便携", "轻量"),
         topics=(("快乐露营", "户外欢乐时光"), ("露营出发", "营地好物集合")),
         profile=("adult", "unknown", "autumn")),
    dict(name="清凉", cats=("t恤", "短裤", "凉鞋", "遮阳帽"), adjs=("宽松", "透气", "清爽", "休闲"),
         topics=(("清凉一夏", "夏日出行必备"), ("夏日清凉", "精选清爽穿搭")),
         profile=("youth", "unknown", "summer")),
    dict(name="送礼", cats=("礼盒", "香薰", "保温杯", "丝巾"), adjs=("创意", "走心", "精美", "典雅"),
         topics=(("送礼好物", "为爱精挑细选"), ("走心礼物", "心意满满之选")),
         profile=("adult", "female", "unknown")),
    dict(name="新生", cats=("奶粉", "纸尿裤", "婴儿枕", "浴巾"), adjs=("柔软", "亲肤", "安心", "透气"),
         topics=(("初生好礼", "新生儿礼物"), ("宝宝呵护", "新手爸妈必囤")),
         profile=("child", "unknown", "unknown")),
    dict(name="球场", cats=("篮球鞋", "运动裤", "卫衣", "护腕"), adjs=("经典", "弹力", "速干", "耐磨"),
         topics=(("尽情挥洒汗水", "是兄弟一起上球场"), ("运动时刻", "活力能量出发")),
         profile=("youth", "male", "unknown")),
    dict(name="下厨", cats=("炒锅", "刀具", "砧板", "汤锅"), adjs=("不粘", "锋利", "抗菌", "导热"),
         topics=(("下厨好帮手", "美味轻松做"), ("厨房焕新", "烹饪好物集合")),
         profile=("adult", "female", "unknown")),
    dict(name="办公", cats=("键盘", "鼠标", "台灯", "支架"), adjs=("静音", "护眼", "人体工学", "无线"),
         topics=(("高效办公", "桌面好物推荐"), ("工位升级", "办公效率加倍")),
         profile=("adult", "unknown", "unknown")),
    dict(name="萌宠", cats=("猫粮", "猫窝", "逗猫棒", "猫砂"), adjs=("营养", "保暖", "互动", "除臭"),
         topics=(("猫咪驾到", "萌宠生活指南"), ("爱宠日常", "铲屎官必备")),
         profile=("adult", "unknown", "unknown")),
]

_TITLE_SUFFIXES = ("", "新款", "升级款", "家用版", "便携装", "加厚型", "大容量")


def make_demo_catalog(n: int = 50, seed: int = 13) -> tuple[list[Product], list[LabeledPair]]:
    """A scene-grouped catalog plus its human/mined topic pairs."""
    rng = np.random.default_rng(seed)
    products: list[Product] = []
    pairs: list[LabeledPair] = []
    seen_titles: set[str] = set()
    for i in range(n):
        scene = _SCENES[i % len(_SCENES)]
        cat = scene["cats"][(i // len(_SCENES)) % len(scene["cats"])]
        adj = scene["adjs"][int(rng.integers(len(scene["adjs"])))]
        title = f"{adj}{cat}"
        for suffix in _TITLE_SUFFIXES:
            if title + suffix not in seen_titles:
                title = title + suffix
                break
        seen_titles.add(title)

        if i % 3 == 0:
            ocr = f"{scene['name']}必备 @ {cat}精选好物"
        elif i % 3 == 1:
            ocr = f"全新{cat}焕新上市，精工细作，{adj}设计贴心实用，舒适耐用经久不衰，品质保障售后无忧"
        else:
            ocr = ""
        copywriting = (f"精选{cat}，{adj}设计。舒适体验，物超所值。" if i % 2 == 0 else None)
        age, gender, season = scene["profile"]
        products.append(Product(
            id=f"p{i:03d}",
            title=title,
            attributes=(("category", cat), ("style", adj), ("适用场景", scene["name"])),
            ocr_text=ocr,
            profile=ProfileFeatures(age=age, gender=gender, season=season),
            copywriting=copywriting,
        ))

        if i % 5 != 4:
            phrase_a, phrase_b = scene["topics"][i % len(scene["topics"])]
            pairs.append(LabeledPair(
                product_id=products[-1].id,
                title=TopicTitle(phrase_a, phrase_b, TopicSource.HUMAN),
                label=1,
                origin=PairOrigin.ONLINE_POSITIVE,
            ))
        if i % 10 == 3:
            phrase_a, phrase_b = scene["topics"][(i + 1) % len(scene["topics"])]
            pairs.append(LabeledPair(
                product_id=products[-1].id,
                title=TopicTitle(phrase_a, phrase_b, TopicSource.HUMAN),
                label=1,
                origin=PairOrigin.ONLINE_POSITIVE,
            ))
        if i % 10 == 7:
            pairs.append(LabeledPair(
                product_id=products[-1].id,
                title=TopicTitle(f"{scene['name']}好物", "人气精选集合", TopicSource.MINED),
                label=1,
                origin=PairOrigin.AUGMENTED,
            ))
    return products, pairs


def write_demo_files(directory: str | Path, n: int = 50, seed: int = 13) -> dict[str, Path]:
    """Write products.jsonl and topics.jsonl for CLI runs; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    products, pairs = make_demo_catalog(n, seed)
    catalog_path = directory / "products.jsonl"
    topics_path = directory / "topics.jsonl"
    write_catalog(catalog_path, products)
    write_topics(topics_path, pairs)
    return {"catalog": catalog_path, "topics": topics_path}


# ---------------------------------------------------------------------------
# Labeled topic set for clustering evaluation
# ---------------------------------------------------------------------------

_GROUP_CORES = ("露营", "烧烤", "跑步", "瑜伽", "婴儿", "辅食", "书房", "台灯", "保暖",
                "滑雪", "烘焙", "清洁", "背包", "行李", "猫咪", "鱼缸", "种植", "车载")

_CONFUSERS = ("精选", "好物", "推荐", "必备", "清单", "合集", "人气", "品质", "优选", "心动",
              "焕新", "上新", "特惠", "甄选", "集锦", "攻略", "指南", "灵感", "氛围", "妙招")


def make_labeled_topic_set(seed: int = 7) -> tuple[list[str], list[int]]:
    """65 synthetic topic titles in 18 groups.

    Each title carries one group scene word plus two generic merchandising
    words drawn from a shared pool, so bag-of-feature similarity between
    unrelated titles often rivals within-group similarity.
    """
    rng = np.random.default_rng(seed)
    sizes = [4] * 11 + [3] * 7  # 65 titles
    titles: list[str] = []
    groups: list[int] = []
    for group, size in enumerate(sizes):
        for _ in range(size):
            picks = rng.choice(len(_CONFUSERS), size=2, replace=False)
            titles.append(f"{_GROUP_CORES[group]}{_CONFUSERS[picks[0]]}"
                          f" @ {_CONFUSERS[picks[1]]}")
            groups.append(group)
    return titles, groups


# ---------------------------------------------------------------------------
# Classifier fixtures
# ---------------------------------------------------------------------------

_COHERENCE_HEADS = ("清凉", "露营", "送礼", "下厨", "运动", "亲子", "旅行", "焕新")
_COHERENCE_BODIES = ("一夏", "出发", "好物", "帮手", "时刻", "日常", "攻略", "指南")
_COHERENCE_VERBS = ("精选", "甄选", "优选", "严选")
_COHERENCE_TAILS = ("必备", "推荐", "之选", "清单")


def make_coherence_fixture(n: int = 200, seed: int = 11) -> list[TopicTitle]:
    """Clean templated titles whose last two tokens come from a closed tail set."""
    rng = np.random.default_rng(seed)
    titles = []
    for _ in range(n):
        head = _COHERENCE_HEADS[int(rng.integers(len(_COHERENCE_HEADS)))]
        body = _COHERENCE_BODIES[int(rng.integers(len(_COHERENCE_BODIES)))]
        verb = _COHERENCE_VERBS[int(rng.integers(len(_COHERENCE_VERBS)))]
        tail = _COHERENCE_TAILS[int(rng.integers(len(_COHERENCE_TAILS)))]
        titles.append(TopicTitle(f"{head}{body}", f"{verb}{tail}", TopicSource.HUMAN))
    return titles


_CORRELATION_SCENES = [
    ("露营", "帐篷", "户外"), ("游泳", "泳镜", "防雾"), ("烘焙", "烤箱", "家用"),
    ("绘画", "画板", "水洗"), ("钓鱼", "鱼竿", "碳素"), ("登山", "冲锋衣", "透湿"),
    ("咖啡", "手冲壶", "控温"), ("瑜伽", "瑜伽垫", "防滑"), ("观星", "望远镜", "高倍"),
    ("骑行", "头盔", "一体"), ("茶道", "茶壶", "紫砂"), ("滑板", "板面", "枫木"),
    ("园艺", "喷壶", "细雾"), ("攀岩", "安全带", "承重"), ("棋牌", "棋盘", "折叠"),
    ("摄影", "三脚架", "碳纤"),
]


def make_correlation_fixture(n: int = 80, seed: int = 17) -> list[tuple[Product, TopicTitle]]:
    """Positive pairs whose topic title copies the product title tokens.

    Sixteen mini-scenes with disjoint vocabularies keep random mismatches
    almost always cross-scene, so token overlap separates true pairs.
    """
    del seed  # titles are fully determined by the scene table
    pairs = []
    for i in range(n):
        scene_name, cat, adj = _CORRELATION_SCENES[i % len(_CORRELATION_SCENES)]
        product = Product(
            id=f"c{i:03d}",
            title=f"{adj}{cat}{i}号",
            attributes=(("category", cat),),
            profile=ProfileFeatures(),
        )
        title = TopicTitle(f"{scene_name}好物", product.title, TopicSource.HUMAN)
        pairs.append((product, title))
    return pairs


_OCR_FILLER = ("全场包邮限时抢购", "工厂直供品质保证", "七天无理由退换", "现货速发售后无忧",
               "严选材质经久耐用", "多色可选尺码齐全", "镇店爆款口碑推荐", "支持批发量大从优")


def make_augmentation_fixture(seed: int = 19) -> tuple[
        list[tuple[Product, TopicTitle]], list[tuple[Product, str]], list[tuple[Product, str]]]:
    """(positives, ocr_negatives, candidates): short topic titles (at most 6
    tokens) against long OCR blurbs (at least 30 tokens); the first three
    candidates mimic positives."""
    rng = np.random.default_rng(seed)
    positives: list[tuple[Product, TopicTitle]] = []
    negatives: list[tuple[Product, str]] = []
    for i in range(60):
        scene = _SCENES[i % len(_SCENES)]
        cat = scene["cats"][int(rng.integers(len(scene["cats"])))]
        adj = scene["adjs"][int(rng.integers(len(scene["adjs"])))]
        age, gender, season = scene["profile"]
        product = Product(
            id=f"a{i:03d}",
            title=f"{adj}{cat}{_TITLE_SUFFIXES[i % len(_TITLE_SUFFIXES)]}",
            attributes=(("category", cat),),
            profile=ProfileFeatures(age=age, gender=gender, season=season),
        )
        positives.append((product, TopicTitle(
            f"{scene['name']}好物", "精选", TopicSource.HUMAN)))
        filler = "".join(_OCR_FILLER[int(rng.integers(len(_OCR_FILLER)))] for _ in range(4))
        negatives.append((product, f"{cat}{filler}"))

    candidates: list[tuple[Product, str]] = []
    for j in range(10):
        scene = _SCENES[j % len(_SCENES)]
        cat = scene["cats"][j % len(scene["cats"])]
        age, gender, season = scene["profile"]
        product = Product(
            id=f"m{j:03d}",
            title=f"新品{cat}",
            attributes=(("category", cat),),
            profile=ProfileFeatures(age=age, gender=gender, season=season),
        )
        if j < 3:
            candidates.append((product, f"{scene['name']}好物 @ 精选"))
        else:
            filler = "".join(_OCR_FILLER[(j + k) % len(_OCR_FILLER)] for k in range(4))
            candidates.append((product, f"{cat}{filler}"))
    return positives, negatives, candidates
