#!/usr/bin/env python3
"""Writes the bundled synthetic thread corpus (data/fixture/threads.jsonl).

Deterministic: the same script always produces the same bytes. The trees mix
ordinary discussion with the cases the filter has to handle: deleted and
removed bodies, bot authors, bare links, one-word replies, copy-paste
duplicates, link posts without a body, and orphaned comments whose parent is
missing from the export.
"""

import argparse
import json
import random
from pathlib import Path

COMMUNITIES = {
    "politics": ["the new voting bill", "campaign finance limits", "term limits for senators"],
    "worldnews": ["the trade summit", "sanctions on exports", "the refugee agreement"],
    "economics": ["interest rate hikes", "the minimum wage debate", "rising grocery prices"],
    "climate": ["the carbon tax", "coastal flood barriers", "the coal plant closures"],
    "technology": ["the new privacy rules", "self driving trucks", "open source funding"],
    "education": ["student loan relief", "school phone bans", "four day school weeks"],
    "healthcare": ["drug price caps", "the clinic closures", "public health insurance"],
    "privacy": ["facial recognition cameras", "data broker laws", "encrypted messaging bans"],
    "urbanplanning": ["bike lanes downtown", "the zoning reform", "the new light rail line"],
    "energy": ["nuclear plant extensions", "rooftop solar credits", "the pipeline approval"],
    "law": ["the supreme court ruling", "police body cameras", "bail reform"],
    "science": ["the research budget cuts", "the moon mission delay", "lab animal rules"],
    "history": ["renaming old monuments", "the museum repatriation", "teaching local history"],
    "philosophy": ["free will and punishment", "the ethics of automation", "moral luck"],
    "housing": ["rent control", "the vacancy tax", "tiny home villages"],
    "labor": ["the rail strike", "remote work mandates", "gig worker protections"],
}

OPENERS = [
    "I think", "Honestly", "In my experience", "The way I see it", "Frankly",
    "From what I have read", "Let's be real", "My view is that", "It seems to me",
    "As someone who lives with this,",
]
POSITIVE = [
    "is a great step forward", "would help a lot of families", "is a smart and fair idea",
    "could be a real success", "is the best option we have", "makes me hopeful",
    "will benefit working people", "is a good compromise", "was handled well",
]
NEGATIVE = [
    "is a terrible mistake", "will hurt the people it claims to help", "is a waste of money",
    "makes the problem worse", "is unfair to small towns", "feels like a dangerous precedent",
    "was a disaster from the start", "is corrupt and broken", "will fail like last time",
]
NEUTRAL = [
    "needs more study before anyone votes", "depends on how it is enforced",
    "will take years to show results", "is mostly about the details",
    "comes down to who pays for it", "has been debated for decades",
]
REASONS = [
    "because the numbers just do not add up",
    "since nobody asked the people affected",
    "and the evidence from other countries backs that up",
    "because the last three attempts went nowhere",
    "given how much the costs have gone up",
    "and local officials have said the same thing",
    "but the media keeps ignoring that part",
    "which is why turnout matters so much",
]
REPLY_AGREE = [
    "Agreed, {topic} {verdict}.", "Exactly this. {topic} {verdict}.",
    "Yes, and {topic} {verdict} {reason}.", "I feel the same, {topic} {verdict}.",
]
REPLY_DISAGREE = [
    "I disagree, {topic} {verdict}.", "Not really. {topic} {verdict} {reason}.",
    "That is not how it works, {topic} {verdict}.", "Hard disagree, {topic} {verdict}.",
]
QUESTIONS = [
    "Do you have a source for that?", "What would you do instead?",
    "Who exactly benefits from {topic}?", "How would that even be enforced?",
]
SHORT_REPLIES = ["lol", "This.", "Source?", "ok", "Same here"]
LINKS = [
    "https://example.org/report.pdf", "http://news.example.com/story?id=42",
    "www.example.net/analysis",
]


def verdict(rng):
    pool = rng.choice([POSITIVE, NEGATIVE, NEUTRAL])
    return rng.choice(pool)


def comment_text(rng, topic):
    text = f"{rng.choice(OPENERS)} {topic} {verdict(rng)} {rng.choice(REASONS)}."
    if rng.random() < 0.3:
        text += f" {rng.choice(QUESTIONS).format(topic=topic)}"
    if rng.random() < 0.12:
        text += f" See {rng.choice(LINKS)} for details."
    return text


def reply_text(rng, topic):
    roll = rng.random()
    if roll < 0.45:
        tmpl = rng.choice(REPLY_AGREE)
    elif roll < 0.9:
        tmpl = rng.choice(REPLY_DISAGREE)
    else:
        return comment_text(rng, topic)
    text = tmpl.format(topic=topic, verdict=verdict(rng), reason=rng.choice(REASONS))
    return text[0].upper() + text[1:]


class Writer:
    def __init__(self, rng):
        self.rng = rng
        self.rows = []
        self.clock = 1_700_000_000
        self.next_id = 1

    def add(self, parent, community, title, body, author=None):
        node_id = f"t{self.next_id:05d}"
        self.next_id += 1
        self.clock += self.rng.randint(5, 900)
        self.rows.append({
            "id": node_id,
            "parent_id": parent,
            "community": community,
            "post_title": title,
            "author": author or f"user_{self.rng.randint(1, 400):03d}",
            "body": body,
            "score": self.rng.randint(-5, 250),
            "created_utc": self.clock,
        })
        return node_id


def build(seed):
    rng = random.Random(seed)
    w = Writer(rng)
    for community, titles in COMMUNITIES.items():
        for t_index, title in enumerate(titles[:2]):
            topic = title
            post_body = "" if t_index == 1 and rng.random() < 0.25 else (
                f"Discussion thread about {title}. {comment_text(rng, topic)}")
            post = w.add(None, community, title.capitalize(), post_body)
            for _ in range(rng.randint(2, 3)):
                roll = rng.random()
                if roll < 0.06:
                    top = w.add(post, community, title.capitalize(), "[deleted]")
                elif roll < 0.1:
                    top = w.add(post, community, title.capitalize(),
                                "Your comment was removed for breaking rule 2.",
                                author="AutoModerator")
                else:
                    top = w.add(post, community, title.capitalize(), comment_text(rng, topic))
                for _ in range(rng.randint(1, 3)):
                    r = rng.random()
                    if r < 0.05:
                        body = "[removed]"
                    elif r < 0.1:
                        body = rng.choice(SHORT_REPLIES)
                    elif r < 0.13:
                        body = rng.choice(LINKS)
                    else:
                        body = reply_text(rng, topic)
                    child = w.add(top, community, title.capitalize(), body)
                    if rng.random() < 0.35:
                        w.add(child, community, title.capitalize(), reply_text(rng, topic))
    # Copy-paste duplicates of existing exchanges under a fresh parent.
    for _ in range(6):
        src = rng.choice([r for r in w.rows if r["parent_id"] and len(r["body"]) > 40])
        kids = [r for r in w.rows if r["parent_id"] == src["id"]]
        if not kids:
            continue
        parent = w.add(src["parent_id"], src["community"], src["post_title"], src["body"])
        w.add(parent, src["community"], src["post_title"], kids[0]["body"])
    # Orphans: the parent never made it into the export.
    for k in range(3):
        community = rng.choice(list(COMMUNITIES))
        title = COMMUNITIES[community][0].capitalize()
        orphan = w.add(f"missing{k}", community, title, comment_text(rng, title.lower()))
        w.add(orphan, community, title, reply_text(rng, title.lower()))
    return w.rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=20240)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data/fixture/threads.jsonl"))
    args = ap.parse_args()
    rows = build(args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
    print(f"{len(rows)} nodes -> {out}")


if __name__ == "__main__":
    main()
