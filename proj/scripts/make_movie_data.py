#!/usr/bin/env python3
"""Regenerates data/movie: a small deterministic film database.

Every movie links to at least one actor and every actor to at least one
movie, so joins through movie_actor never drop result rows.
"""

import os

ADJ = ["silver", "broken", "silent", "crimson", "hidden",
       "golden", "frozen", "burning", "lonely", "midnight"]
NOUN = ["horizon", "river", "empire", "garden", "shadow", "voyage",
        "canyon", "harbor", "temple", "island", "fortress", "lantern",
        "meadow", "orchard", "summit", "mirror", "compass", "anchor",
        "beacon", "thunder", "crystal", "ember", "falcon", "harvest",
        "legacy", "monsoon", "nebula", "oracle", "prism", "quarry"]
AREAS = ["france", "japan", "india", "brazil", "canada", "egypt",
         "norway", "mexico", "kenya", "spain", "chile", "peru",
         "ghana", "nepal", "austria", "greece", "poland", "turkey",
         "vietnam", "cuba", "iceland", "portugal", "morocco", "jordan"]
GENRES = ["action", "drama", "comedy", "thriller", "romance", "fantasy",
          "mystery", "western", "musical", "horror", "biography", "adventure"]
FIRST = ["alan", "bella", "carl", "dina", "emil",
         "fiona", "greg", "hana", "ivan", "julia"]
LAST = ["torres", "keane", "moreau", "tanaka", "osei", "silva", "novak", "haas"]
NATION = ["french", "japanese", "indian", "brazilian",
          "canadian", "egyptian", "norwegian", "mexican"]


def main() -> None:
    out_dir = os.path.join(os.path.dirname(__file__), "..", "data", "movie", "db")
    os.makedirs(out_dir, exist_ok=True)

    movies = []
    for i in range(300):
        movies.append((
            i + 1,
            f"{ADJ[i % 10]} {NOUN[i // 10]}",  # 10 x 30 distinct titles
            AREAS[i % 24],
            1980 + (i * 7) % 40,  # gcd(7, 40) = 1: all 40 years appear
            GENRES[(i * 5) % 12],
        ))

    actors = []
    for i in range(80):
        actors.append((
            i + 1,
            f"{FIRST[i % 10]} {LAST[i // 10]}",  # 10 x 8 distinct names
            NATION[(i * 3) % 8],
        ))

    links = []
    for i in range(300):
        links.append((2 * i + 1, i + 1, (2 * i) % 80 + 1))
        links.append((2 * i + 2, i + 1, (2 * i + 7) % 80 + 1))

    def write(name, header, rows):
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8") as f:
            f.write("\t".join(header) + "\n")
            for row in rows:
                f.write("\t".join(str(v) for v in row) + "\n")
        print(f"wrote {path} ({len(rows)} rows)")

    write("movie.tsv", ["movie_id", "title", "area", "year", "genre"], movies)
    write("actor.tsv", ["actor_id", "name", "nationality"], actors)
    write("movie_actor.tsv", ["ma_id", "movie_id", "actor_id"], links)


if __name__ == "__main__":
    main()
