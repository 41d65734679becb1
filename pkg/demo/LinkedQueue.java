package demo.collections;

public class LinkedQueue<E> {
    private Node<E> head;
    private Node<E> tail;
    private int count;

    // adds the element to the tail of the queue
    public void enqueue(E element) {
        Node<E> node = new Node<>(element);
        if (tail == null) {
            head = node;
        } else {
            tail.next = node;
        }
        tail = node;
        count++;
    }

    /**
     * Removes the element at the head of the queue and returns it.
     */
    public E dequeue() {
        if (head == null) {
            throw new IllegalStateException("queue is empty");
        }
        E element = head.value;
        head = head.next;
        if (head == null) {
            tail = null;
        }
        count--;
        return element;
    }

    /** Checks whether the queue is empty. */
    public boolean isEmpty() {
        return count == 0;
    }

    private static final class Node<E> {
        final E value;
        Node<E> next;

        Node(E value) {
            this.value = value;
        }
    }
}
